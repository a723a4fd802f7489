#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>

#include "roiqubo/image.hpp"
#include "roiqubo/levels.hpp"
#include "roiqubo/random.hpp"

namespace roiqubo {

struct PhantomSpec {
  std::uint64_t seed = 1;
  std::size_t size = 48;
  RoiSpec roi{18, 18, 12, 12};
  LevelScheme levels{{0.5, 1.0}};
  std::size_t n_background_shapes = 6;
  std::size_t n_roi_shapes = 4;
};

namespace detail {

struct Shape {
  bool ellipse;
  double cx, cy;  // center, continuous pixel coordinates (col + 0.5, row + 0.5)
  double hx, hy;  // half extents
  double value;
};

inline bool covers(const Shape& s, double x, double y) {
  const double u = (x - s.cx) / s.hx, v = (y - s.cy) / s.hy;
  return s.ellipse ? u * u + v * v <= 1.0 : std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
}

// Shape centered on a random pixel center inside [x0, x0+w) x [y0, y0+h).
// Half extents are >= 0.5 so the center pixel is always covered.
inline Shape random_shape(std::mt19937_64& rng, const LevelScheme& levels, std::size_t x0,
                          std::size_t y0, std::size_t w, std::size_t h, double min_half,
                          double max_half) {
  Shape s{};
  s.ellipse = uniform01(rng) < 0.5;
  s.cx = static_cast<double>(x0 + uniform_index(rng, w)) + 0.5;
  s.cy = static_cast<double>(y0 + uniform_index(rng, h)) + 0.5;
  s.hx = uniform_real(rng, min_half, max_half);
  s.hy = uniform_real(rng, min_half, max_half);
  s.value = levels.alpha(uniform_index(rng, levels.size()));
  return s;
}

inline void draw(Image& img, const Shape& s, const RoiSpec& clip) {
  for (std::size_t r = clip.y0; r < clip.y0 + clip.h; ++r)
    for (std::size_t c = clip.x0; c < clip.x0 + clip.w; ++c)
      if (covers(s, static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5)) img(r, c) = s.value;
}

}  // namespace detail

/// Piecewise-constant phantom of rectangles and ellipses. Background shapes
/// are placed anywhere in the image (and may cross the ROI); ROI shapes are
/// confined to the ROI and drawn last. Later shapes overwrite earlier ones.
/// Every pixel is 0 or one of the scheme's levels.
inline Image generate_phantom(const PhantomSpec& spec) {
  detail::require(spec.size >= 1, "phantom size must be positive");
  require_roi_fits(spec.roi, spec.size, spec.size);
  std::mt19937_64 rng(spec.seed);
  Image img(spec.size, spec.size);
  const auto n = static_cast<double>(spec.size);
  const RoiSpec whole{0, 0, spec.size, spec.size};

  for (std::size_t k = 0; k < spec.n_background_shapes; ++k) {
    auto s = detail::random_shape(rng, spec.levels, 0, 0, spec.size, spec.size,
                                  std::max(0.5, n / 16), std::max(0.5, n / 4));
    detail::draw(img, s, whole);
  }
  const double roi_max =
      std::max(0.5, static_cast<double>(std::min(spec.roi.w, spec.roi.h)) / 3.0);
  for (std::size_t k = 0; k < spec.n_roi_shapes; ++k) {
    auto s = detail::random_shape(rng, spec.levels, spec.roi.x0, spec.roi.y0, spec.roi.w,
                                  spec.roi.h, 0.5, roi_max);
    detail::draw(img, s, spec.roi);
  }
  return img;
}

}  // namespace roiqubo
