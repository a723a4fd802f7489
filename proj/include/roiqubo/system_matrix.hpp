#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/geometry.hpp"
#include "roiqubo/image.hpp"

namespace roiqubo {

struct MatrixEntry {
  std::uint32_t pixel;
  double weight;
};

/// Sparse ray/pixel intersection-length operator (CSR). Row r corresponds to
/// (angle r / n_detectors, bin r % n_detectors); entries within a row are
/// sorted by pixel index and all weights are strictly positive.
class SystemMatrix {
 public:
  SystemMatrix(ProjectionGeometry geometry, std::size_t width, std::size_t height,
               std::vector<std::size_t> row_ptr, std::vector<MatrixEntry> entries)
      : geometry_(std::move(geometry)),
        width_(width),
        height_(height),
        row_ptr_(std::move(row_ptr)),
        entries_(std::move(entries)) {}

  const ProjectionGeometry& geometry() const noexcept { return geometry_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t n_pixels() const noexcept { return width_ * height_; }
  std::size_t n_rays() const noexcept { return row_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  std::span<const MatrixEntry> row(std::size_t r) const {
    return std::span<const MatrixEntry>(entries_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
  }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (const auto& e : row(r)) s += e.weight;
    return s;
  }

  /// Same sparsity pattern with every weight multiplied by `factor` (> 0).
  SystemMatrix scaled(double factor) const {
    detail::require(factor > 0 && std::isfinite(factor), "scale factor must be positive");
    SystemMatrix out = *this;
    for (auto& e : out.entries_) e.weight *= factor;
    return out;
  }

 private:
  ProjectionGeometry geometry_;
  std::size_t width_;
  std::size_t height_;
  std::vector<std::size_t> row_ptr_;
  std::vector<MatrixEntry> entries_;
};

namespace detail {

// Below this the ray is treated as parallel to an axis.
inline constexpr double kParallelEps = 1e-14;
// Segments shorter than this are floating-point debris at grid-line corners.
inline constexpr double kMinSegment = 1e-12;

// Exact chord lengths of one ray through a width x height pixel grid centered
// on the origin. Appends (pixel, length) pairs sorted by pixel.
inline void trace_ray(double theta, double s, std::size_t width, std::size_t height,
                      std::vector<MatrixEntry>& out) {
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const double px = s * c, py = s * sn;  // foot of the perpendicular
  const double dx = -sn, dy = c;         // unit direction
  const double xmin = -0.5 * static_cast<double>(width), xmax = -xmin;
  const double ymin = -0.5 * static_cast<double>(height), ymax = -ymin;

  double tlo = -INFINITY, thi = INFINITY;
  auto clip = [&](double p, double d, double lo, double hi) {
    if (std::abs(d) < kParallelEps) {
      if (p < lo || p > hi) thi = -INFINITY;
      return;
    }
    double t1 = (lo - p) / d, t2 = (hi - p) / d;
    if (t1 > t2) std::swap(t1, t2);
    tlo = std::max(tlo, t1);
    thi = std::min(thi, t2);
  };
  clip(px, dx, xmin, xmax);
  clip(py, dy, ymin, ymax);
  if (!(thi - tlo > kMinSegment)) return;

  std::vector<double> ts{tlo, thi};
  auto crossings = [&](double p, double d, double lo, std::size_t n) {
    if (std::abs(d) < kParallelEps) return;
    for (std::size_t k = 1; k < n; ++k) {
      double t = (lo + static_cast<double>(k) - p) / d;
      if (t > tlo && t < thi) ts.push_back(t);
    }
  };
  crossings(px, dx, xmin, width);
  crossings(py, dy, ymin, height);
  std::sort(ts.begin(), ts.end());

  // A ray parallel to an axis and lying exactly on a grid line splits its
  // chord evenly between the pixels on either side that exist, so a ray on
  // the outer boundary still carries its full chord.
  auto cells = [](double p, double d, double lo, std::size_t n, double at, std::size_t idx[2]) {
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    if (std::abs(d) < kParallelEps) {
      const double f = p - lo;
      const double k = std::round(f);
      if (std::abs(f - k) < 1e-12) {
        int count = 0;
        const auto ki = static_cast<std::ptrdiff_t>(k);
        if (ki - 1 >= 0 && ki - 1 <= last) idx[count++] = static_cast<std::size_t>(ki - 1);
        if (ki >= 0 && ki <= last) idx[count++] = static_cast<std::size_t>(ki);
        return count;
      }
      idx[0] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(f)), 0, last));
      return 1;
    }
    idx[0] = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(p + at * d - lo)), 0, last));
    return 1;
  };
  const std::size_t first = out.size();
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double len = ts[k + 1] - ts[k];
    if (len <= kMinSegment) continue;
    const double tm = 0.5 * (ts[k] + ts[k + 1]);
    std::size_t cols[2], rows[2];
    const int nc = cells(px, dx, xmin, width, tm, cols);
    const int nr = cells(py, dy, ymin, height, tm, rows);
    if (nc == 0 || nr == 0) continue;
    const double share = len / static_cast<double>(nc * nr);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) out.push_back({static_cast<std::uint32_t>(rows[i] * width + cols[j]), share});
  }
  auto begin = out.begin() + static_cast<std::ptrdiff_t>(first);
  std::sort(begin, out.end(), [](const auto& a, const auto& b) { return a.pixel < b.pixel; });
  // merge repeated pixels (split segments at near-coincident crossings)
  auto w = begin;
  for (auto it = begin; it != out.end(); ++it) {
    if (w != begin && std::prev(w)->pixel == it->pixel)
      std::prev(w)->weight += it->weight;
    else
      *w++ = *it;
  }
  out.erase(w, out.end());
}

}  // namespace detail

/// Siddon-style exact traversal of every ray in `geometry` over a
/// width x height grid of unit pixels centered on the rotation center.
/// Rays missing the grid yield empty rows.
inline SystemMatrix build_system_matrix(const ProjectionGeometry& geometry, std::size_t width,
                                        std::size_t height) {
  geometry.validate();
  detail::require(width >= 1 && height >= 1, "grid dimensions must be positive");
  std::vector<std::size_t> row_ptr{0};
  std::vector<MatrixEntry> entries;
  row_ptr.reserve(geometry.n_rays() + 1);
  for (double theta : geometry.angles) {
    for (std::size_t d = 0; d < geometry.n_detectors; ++d) {
      detail::trace_ray(theta, geometry.detector_offset(d), width, height, entries);
      row_ptr.push_back(entries.size());
    }
  }
  return SystemMatrix(geometry, width, height, std::move(row_ptr), std::move(entries));
}

/// Discrete Radon transform: one sparse dot product per ray.
inline Sinogram forward_project(const Image& image, const SystemMatrix& matrix) {
  detail::require(image.width() == matrix.width() && image.height() == matrix.height(),
                  "image dimensions do not match the system matrix grid");
  const auto& g = matrix.geometry();
  Sinogram sino(g.n_angles(), g.n_detectors);
  auto img = image.values();
  auto out = sino.values();
  for (std::size_t r = 0; r < matrix.n_rays(); ++r) {
    double acc = 0.0;
    for (const auto& e : matrix.row(r)) acc += e.weight * img[e.pixel];
    out[r] = acc;
  }
  return sino;
}

/// Transpose application of the system matrix (unfiltered backprojection).
inline Image backproject(const Sinogram& sino, const SystemMatrix& matrix) {
  const auto& g = matrix.geometry();
  detail::require(sino.n_angles() == g.n_angles() && sino.n_detectors() == g.n_detectors,
                  "sinogram dimensions do not match the system matrix geometry");
  Image image(matrix.width(), matrix.height());
  auto img = image.values();
  auto in = sino.values();
  for (std::size_t r = 0; r < matrix.n_rays(); ++r)
    for (const auto& e : matrix.row(r)) img[e.pixel] += e.weight * in[r];
  return image;
}

/// Sums `detector_factor` consecutive detector bins into one; angles unchanged.
inline Sinogram downsample_sinogram(const Sinogram& sino, std::size_t detector_factor) {
  detail::require(detector_factor >= 1, "detector factor must be at least 1");
  detail::require(sino.n_detectors() % detector_factor == 0,
                  "detector count " + std::to_string(sino.n_detectors()) +
                      " is not divisible by factor " + std::to_string(detector_factor));
  const std::size_t nd = sino.n_detectors() / detector_factor;
  Sinogram out(sino.n_angles(), nd);
  for (std::size_t a = 0; a < sino.n_angles(); ++a)
    for (std::size_t d = 0; d < nd; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < detector_factor; ++k) acc += sino(a, d * detector_factor + k);
      out(a, d) = acc;
    }
  return out;
}

}  // namespace roiqubo
