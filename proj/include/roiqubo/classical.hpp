#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/geometry.hpp"
#include "roiqubo/image.hpp"
#include "roiqubo/system_matrix.hpp"

namespace roiqubo {

enum class FbpFilter { ram_lak };
enum class FbpInterpolation { linear };

struct FbpConfig {
  FbpFilter filter = FbpFilter::ram_lak;
  FbpInterpolation interpolation = FbpInterpolation::linear;
};

// View access order within a SART sweep. Interleaved visits views in
// bit-reversed index order so consecutive updates come from well-separated
// angles; sequential walks them in angle order.
enum class SartOrder { interleaved, sequential };

inline std::string to_string(SartOrder o) { return o == SartOrder::interleaved ? "interleaved" : "sequential"; }

struct SartConfig {
  std::size_t n_iterations = 20;
  double relaxation = 1.0;
  SartOrder order = SartOrder::interleaved;

  void validate() const {
    detail::require(n_iterations >= 1, "SART needs at least one iteration");
    detail::require(relaxation > 0 && relaxation <= 2, "SART relaxation must lie in (0, 2]");
  }
};

namespace detail {

struct FftwDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwDeleter>;

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Ram-Lak ramp filtering of every detector row. The band-limited ramp is
// built from its spatial samples (h0 = 1/(4 tau^2), h_odd = -1/(pi n tau)^2),
// so the zero-frequency term is not lost to discretization; rows are zero
// padded to at least twice their length to avoid circular wrap-around.
inline Sinogram ramp_filter(const Sinogram& sino, double tau) {
  const std::size_t nd = sino.n_detectors();
  const std::size_t len = next_pow2(2 * nd);
  const std::size_t nfreq = len / 2 + 1;

  std::unique_ptr<double, FftwDeleter> real(fftw_alloc_real(len));
  std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(nfreq));
  FftwPlan fwd(fftw_plan_dft_r2c_1d(static_cast<int>(len), real.get(), spec.get(), FFTW_ESTIMATE));
  FftwPlan inv(fftw_plan_dft_c2r_1d(static_cast<int>(len), spec.get(), real.get(), FFTW_ESTIMATE));

  double* buf = real.get();
  for (std::size_t k = 0; k < len; ++k) {
    const auto n = static_cast<long>(k <= len / 2 ? k : len - k);
    if (n == 0)
      buf[k] = 1.0 / (4.0 * tau * tau);
    else if (n % 2 == 1)
      buf[k] = -1.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(n * n) * tau * tau);
    else
      buf[k] = 0.0;
  }
  fftw_execute(fwd.get());
  std::vector<double> response(nfreq);
  // tau: sample spacing of the convolution integral; 1/len: unnormalized inverse
  for (std::size_t f = 0; f < nfreq; ++f)
    response[f] = spec.get()[f][0] * tau / static_cast<double>(len);

  Sinogram out(sino.n_angles(), nd);
  for (std::size_t a = 0; a < sino.n_angles(); ++a) {
    std::fill(buf, buf + len, 0.0);
    auto row = sino.row(a);
    std::copy(row.begin(), row.end(), buf);
    fftw_execute(fwd.get());
    for (std::size_t f = 0; f < nfreq; ++f) {
      spec.get()[f][0] *= response[f];
      spec.get()[f][1] *= response[f];
    }
    fftw_execute(inv.get());
    for (std::size_t d = 0; d < nd; ++d) out(a, d) = buf[d];
  }
  return out;
}

}  // namespace detail

/// Filtered backprojection: ramp filtering per view, then pixel-driven
/// backprojection with linear detector interpolation, scaled by pi / n_angles.
/// The result is not clipped, so negative overshoot is preserved.
inline Image fbp(const Sinogram& sino, const ProjectionGeometry& geometry, std::size_t width,
                 std::size_t height, const FbpConfig& = {}) {
  geometry.validate();
  detail::require(sino.n_angles() == geometry.n_angles() &&
                      sino.n_detectors() == geometry.n_detectors,
                  "sinogram dimensions do not match the geometry");
  detail::require(width >= 1 && height >= 1, "image dimensions must be positive");

  const double tau = geometry.detector_spacing;
  const Sinogram filtered = detail::ramp_filter(sino, tau);
  const std::size_t nd = geometry.n_detectors;
  const double center = 0.5 * static_cast<double>(nd - 1);

  Image img(width, height);
  for (std::size_t a = 0; a < geometry.n_angles(); ++a) {
    const double c = std::cos(geometry.angles[a]), s = std::sin(geometry.angles[a]);
    auto q = filtered.row(a);
    for (std::size_t r = 0; r < height; ++r) {
      const double y = static_cast<double>(r) + 0.5 - 0.5 * static_cast<double>(height);
      for (std::size_t col = 0; col < width; ++col) {
        const double x = static_cast<double>(col) + 0.5 - 0.5 * static_cast<double>(width);
        const double u = (x * c + y * s) / tau + center;
        const double fl = std::floor(u);
        const double t = u - fl;
        const auto i0 = static_cast<long>(fl);
        double v = 0.0;
        if (i0 >= 0 && i0 < static_cast<long>(nd)) v += (1.0 - t) * q[static_cast<std::size_t>(i0)];
        if (i0 + 1 >= 0 && i0 + 1 < static_cast<long>(nd))
          v += t * q[static_cast<std::size_t>(i0 + 1)];
        img(r, col) += v;
      }
    }
  }
  const double scale = std::numbers::pi / static_cast<double>(geometry.n_angles());
  for (double& v : img.values()) v *= scale;
  return img;
}

/// Bit-reversal permutation of 0..n-1: indices of the next power of two in
/// bit-reversed order, dropping those >= n.
inline std::vector<std::size_t> interleaved_order(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < (std::size_t{1} << bits); ++i) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < bits; ++k)
      if ((i >> k) & 1u) r |= std::size_t{1} << (bits - 1 - k);
    if (r < n) order.push_back(r);
  }
  return order;
}

/// SART from a zero image: one sub-iteration per view, in cfg.order.
/// Ray residuals are normalized by row sums and pixel updates by the view's
/// column sums; rays or pixels with zero sums are skipped.
inline Image sart(const Sinogram& sino, const SystemMatrix& matrix, const SartConfig& cfg = {}) {
  cfg.validate();
  const auto& g = matrix.geometry();
  detail::require(sino.n_angles() == g.n_angles() && sino.n_detectors() == g.n_detectors,
                  "sinogram dimensions do not match the system matrix geometry");
  Image img(matrix.width(), matrix.height());
  auto x = img.values();
  auto p = sino.values();
  const std::size_t nd = g.n_detectors;
  std::vector<double> num(matrix.n_pixels()), den(matrix.n_pixels());
  std::vector<std::size_t> order = interleaved_order(g.n_angles());
  if (cfg.order == SartOrder::sequential) std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t it = 0; it < cfg.n_iterations; ++it) {
    for (std::size_t a : order) {
      std::fill(num.begin(), num.end(), 0.0);
      std::fill(den.begin(), den.end(), 0.0);
      for (std::size_t r = a * nd; r < (a + 1) * nd; ++r) {
        auto row = matrix.row(r);
        double proj = 0.0, len = 0.0;
        for (const auto& e : row) {
          proj += e.weight * x[e.pixel];
          len += e.weight;
        }
        if (len <= 0.0) continue;
        const double res = (p[r] - proj) / len;
        for (const auto& e : row) {
          num[e.pixel] += e.weight * res;
          den[e.pixel] += e.weight;
        }
      }
      for (std::size_t j = 0; j < x.size(); ++j)
        if (den[j] > 0.0) x[j] += cfg.relaxation * num[j] / den[j];
    }
  }
  return img;
}

/// Bilinear resize (pixel-center aligned, edge clamped) followed by a
/// truncated Gaussian of radius ceil(3 sigma), renormalized at the borders.
/// sigma == 0 skips the smoothing.
inline Image upsample_and_smooth(const Image& image, std::size_t target_w, std::size_t target_h,
                                 double sigma) {
  detail::require(target_w >= image.width() && target_h >= image.height(),
                  "upsampling target is smaller than the source");
  detail::require(sigma >= 0 && std::isfinite(sigma), "sigma must be non-negative");

  const std::size_t sw = image.width(), sh = image.height();
  Image up(target_w, target_h);
  auto src_coord = [](std::size_t dst, std::size_t n_src, std::size_t n_dst) {
    double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(n_src) /
                   static_cast<double>(n_dst) -
               0.5;
    return std::clamp(s, 0.0, static_cast<double>(n_src - 1));
  };
  for (std::size_t r = 0; r < target_h; ++r) {
    const double sy = src_coord(r, sh, target_h);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, sh - 1);
    const double ty = sy - static_cast<double>(y0);
    for (std::size_t c = 0; c < target_w; ++c) {
      const double sx = src_coord(c, sw, target_w);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, sw - 1);
      const double tx = sx - static_cast<double>(x0);
      up(r, c) = (1 - ty) * ((1 - tx) * image(y0, x0) + tx * image(y0, x1)) +
                 ty * ((1 - tx) * image(y1, x0) + tx * image(y1, x1));
    }
  }
  if (sigma == 0.0) return up;

  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] =
        std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));

  // Separable passes; per-pass renormalization equals 2-D renormalization
  // because the truncated support is a product of intervals.
  auto pass = [&](const Image& in, bool horizontal) {
    Image out(in.width(), in.height());
    const auto w = static_cast<long>(in.width()), h = static_cast<long>(in.height());
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        double acc = 0.0, norm = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          const long rr = horizontal ? r : r + k, cc = horizontal ? c + k : c;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const double wk = kernel[static_cast<std::size_t>(k + radius)];
          acc += wk * in(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          norm += wk;
        }
        out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc / norm;
      }
    return out;
  };
  return pass(pass(up, true), false);
}

/// Copy with negative values replaced by zero.
inline Image clip_negative(Image image) {
  for (double& v : image.values()) v = std::max(v, 0.0);
  return image;
}

}  // namespace roiqubo
