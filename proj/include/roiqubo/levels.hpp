#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "roiqubo/error.hpp"

namespace roiqubo {

/// Strictly increasing positive attenuation levels alpha_1 < ... < alpha_K
/// for the difference encoding: bit k of a pixel contributes
/// weight(k) = alpha_k - alpha_{k-1} (alpha_0 = 0). Indices are 0-based.
class LevelScheme {
 public:
  explicit LevelScheme(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    detail::require(!alphas_.empty(), "level scheme needs at least one level");
    for (std::size_t k = 0; k < alphas_.size(); ++k) {
      detail::require(std::isfinite(alphas_[k]) && alphas_[k] > 0, "levels must be positive");
      detail::require(k == 0 || alphas_[k] > alphas_[k - 1], "levels must be strictly increasing");
    }
    weights_.resize(alphas_.size());
    for (std::size_t k = 0; k < alphas_.size(); ++k) weights_[k] = alphas_[k] - level_below(k);
  }

  std::size_t size() const noexcept { return alphas_.size(); }
  double alpha(std::size_t k) const { return alphas_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// alpha_{k-1}, with alpha_{-1} taken as 0.
  double level_below(std::size_t k) const { return k == 0 ? 0.0 : alphas_[k - 1]; }

  /// sum_k weight(k) * bits[k], evaluated run by run: each maximal run of set
  /// bits [a, b] telescopes to alpha_b - alpha_{a-1}, so a monotone pattern
  /// 1..m decodes to exactly alpha_m.
  template <class BitRange>
  double decode_pixel(const BitRange& bits) const {
    double value = 0.0;
    std::size_t k = 0;
    const std::size_t n = alphas_.size();
    while (k < n) {
      if (!bits[k]) {
        ++k;
        continue;
      }
      std::size_t start = k;
      while (k < n && bits[k]) ++k;
      value += alphas_[k - 1] - level_below(start);
    }
    return value;
  }

  /// Index m such that value == alpha_m exactly, -1 for value == 0, or -2.
  long level_of(double value) const {
    if (value == 0.0) return -1;
    for (std::size_t k = 0; k < alphas_.size(); ++k)
      if (alphas_[k] == value) return static_cast<long>(k);
    return -2;
  }

  bool operator==(const LevelScheme&) const = default;

 private:
  std::vector<double> alphas_;
  std::vector<double> weights_;
};

}  // namespace roiqubo
