#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "roiqubo/error.hpp"

namespace roiqubo {

/// Dense row-major 2-D grid of attenuation values. Pixel (row, col) lives at
/// values()[row * width + col].
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), values_(width * height, fill) {
    detail::require(width >= 1 && height >= 1, "image dimensions must be positive");
  }
  Image(std::size_t width, std::size_t height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    detail::require(width >= 1 && height >= 1, "image dimensions must be positive");
    detail::require(values_.size() == width * height, "image value count does not match dimensions");
    for (double v : values_) detail::require(std::isfinite(v), "image values must be finite");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }

  std::span<double> values() & noexcept { return values_; }
  std::span<const double> values() const& noexcept { return values_; }
  std::span<const double> values() && = delete;  // would dangle

  bool operator==(const Image&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

/// (angle x detector) matrix of line integrals, row-major by angle.
class Sinogram {
 public:
  Sinogram() = default;
  Sinogram(std::size_t n_angles, std::size_t n_detectors, double fill = 0.0)
      : n_angles_(n_angles), n_detectors_(n_detectors), values_(n_angles * n_detectors, fill) {}
  Sinogram(std::size_t n_angles, std::size_t n_detectors, std::vector<double> values)
      : n_angles_(n_angles), n_detectors_(n_detectors), values_(std::move(values)) {
    detail::require(values_.size() == n_angles * n_detectors,
                    "sinogram value count does not match dimensions");
    for (double v : values_) detail::require(std::isfinite(v), "sinogram values must be finite");
  }

  std::size_t n_angles() const noexcept { return n_angles_; }
  std::size_t n_detectors() const noexcept { return n_detectors_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t angle, std::size_t det) { return values_[angle * n_detectors_ + det]; }
  double operator()(std::size_t angle, std::size_t det) const { return values_[angle * n_detectors_ + det]; }

  std::span<double> values() & noexcept { return values_; }
  std::span<const double> values() const& noexcept { return values_; }
  std::span<const double> values() && = delete;  // would dangle
  std::span<const double> row(std::size_t angle) const {
    return std::span<const double>(values_).subspan(angle * n_detectors_, n_detectors_);
  }

  bool operator==(const Sinogram&) const = default;

 private:
  std::size_t n_angles_ = 0;
  std::size_t n_detectors_ = 0;
  std::vector<double> values_;
};

/// Axis-aligned rectangle of pixels: columns [x0, x0 + w), rows [y0, y0 + h).
struct RoiSpec {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t w = 1;
  std::size_t h = 1;

  std::size_t pixel_count() const noexcept { return w * h; }
  bool contains(std::size_t row, std::size_t col) const noexcept {
    return col >= x0 && col < x0 + w && row >= y0 && row < y0 + h;
  }
  bool fits(std::size_t width, std::size_t height) const noexcept {
    return w >= 1 && h >= 1 && x0 + w <= width && y0 + h <= height;
  }
  bool operator==(const RoiSpec&) const = default;
};

inline void require_roi_fits(const RoiSpec& roi, std::size_t width, std::size_t height) {
  if (!roi.fits(width, height)) {
    throw invalid_argument("ROI (" + std::to_string(roi.x0) + "," + std::to_string(roi.y0) + ") " +
                           std::to_string(roi.w) + "x" + std::to_string(roi.h) +
                           " does not fit a " + std::to_string(width) + "x" +
                           std::to_string(height) + " image");
  }
}

/// Copy of the w x h sub-image under `roi`.
inline Image extract_roi(const Image& image, const RoiSpec& roi) {
  require_roi_fits(roi, image.width(), image.height());
  Image patch(roi.w, roi.h);
  for (std::size_t r = 0; r < roi.h; ++r)
    for (std::size_t c = 0; c < roi.w; ++c) patch(r, c) = image(roi.y0 + r, roi.x0 + c);
  return patch;
}

/// Copy of `background` with the ROI pixels replaced by `patch`.
inline Image insert_roi(const Image& background, const Image& patch, const RoiSpec& roi) {
  require_roi_fits(roi, background.width(), background.height());
  detail::require(patch.width() == roi.w && patch.height() == roi.h,
                  "patch dimensions do not match the ROI");
  Image out = background;
  for (std::size_t r = 0; r < roi.h; ++r)
    for (std::size_t c = 0; c < roi.w; ++c) out(roi.y0 + r, roi.x0 + c) = patch(r, c);
  return out;
}

}  // namespace roiqubo
