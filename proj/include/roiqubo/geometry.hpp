#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "roiqubo/error.hpp"

namespace roiqubo {

/// Parallel-beam geometry. Angles are in radians over [0, pi); detector bin d
/// sits at signed offset s_d = (d - (n_detectors - 1) / 2) * detector_spacing
/// from the rotation center, which is the image center. All lengths are in
/// pixel units.
///
/// A ray (angle a, bin d) is the line x cos(theta_a) + y sin(theta_a) = s_d,
/// where x grows with the column index and y grows with the row index.
struct ProjectionGeometry {
  std::vector<double> angles;
  std::size_t n_detectors = 1;
  double detector_spacing = 1.0;

  std::size_t n_angles() const noexcept { return angles.size(); }
  std::size_t n_rays() const noexcept { return angles.size() * n_detectors; }

  double detector_offset(std::size_t d) const noexcept {
    return (static_cast<double>(d) - 0.5 * static_cast<double>(n_detectors - 1)) * detector_spacing;
  }

  void validate() const {
    detail::require(!angles.empty(), "geometry needs at least one angle");
    detail::require(n_detectors >= 1, "geometry needs at least one detector");
    detail::require(detector_spacing > 0 && std::isfinite(detector_spacing),
                    "detector spacing must be positive");
    for (std::size_t k = 0; k < angles.size(); ++k) {
      detail::require(angles[k] >= 0.0 && angles[k] < std::numbers::pi,
                      "angles must lie in [0, pi)");
      detail::require(k == 0 || angles[k] > angles[k - 1], "angles must be strictly increasing");
    }
  }

  bool operator==(const ProjectionGeometry&) const = default;
};

/// Detector count that covers the image diagonal at every angle.
inline std::size_t auto_detector_count(std::size_t image_size) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(image_size) * std::numbers::sqrt2));
}

/// Uniform angles k * pi / n_angles with unit detector spacing. An empty
/// `n_detectors` selects auto_detector_count(image_size).
inline ProjectionGeometry build_geometry(std::size_t n_angles, std::optional<std::size_t> n_detectors,
                                         std::size_t image_size, double detector_spacing = 1.0) {
  detail::require(n_angles >= 1, "n_angles must be at least 1");
  detail::require(!n_detectors || *n_detectors >= 1, "n_detectors must be at least 1");
  ProjectionGeometry g;
  g.angles.resize(n_angles);
  for (std::size_t k = 0; k < n_angles; ++k)
    g.angles[k] = static_cast<double>(k) * std::numbers::pi / static_cast<double>(n_angles);
  if (n_detectors) {
    g.n_detectors = *n_detectors;
  } else {
    detail::require(image_size >= 1, "auto detector count needs a positive image size");
    g.n_detectors = auto_detector_count(image_size);
  }
  g.detector_spacing = detector_spacing;
  g.validate();
  return g;
}

}  // namespace roiqubo
