#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/image.hpp"
#include "roiqubo/levels.hpp"
#include "roiqubo/system_matrix.hpp"

namespace roiqubo {

using Bits = std::vector<std::uint8_t>;

struct VarKey {
  std::size_t row;    // absolute image row
  std::size_t col;    // absolute image column
  std::size_t level;  // 0-based level index
  auto operator<=>(const VarKey&) const = default;
};

/// Bijection between variable ids [0, n) and (row, col, level) triples.
class VariableMap {
 public:
  VariableMap() = default;
  explicit VariableMap(std::vector<VarKey> keys) : keys_(std::move(keys)) {
    for (std::size_t id = 0; id < keys_.size(); ++id) {
      auto [it, fresh] = index_.emplace(keys_[id], id);
      detail::require(fresh, "duplicate variable key in variable map");
    }
  }

  /// ROI pixels in row-major order, levels innermost:
  /// id = ((row - y0) * w + (col - x0)) * K + level.
  static VariableMap for_roi(const RoiSpec& roi, std::size_t n_levels) {
    std::vector<VarKey> keys;
    keys.reserve(roi.pixel_count() * n_levels);
    for (std::size_t r = 0; r < roi.h; ++r)
      for (std::size_t c = 0; c < roi.w; ++c)
        for (std::size_t k = 0; k < n_levels; ++k) keys.push_back({roi.y0 + r, roi.x0 + c, k});
    return VariableMap(std::move(keys));
  }

  std::size_t size() const noexcept { return keys_.size(); }
  const VarKey& key(std::size_t id) const { return keys_.at(id); }
  std::span<const VarKey> keys() const noexcept { return keys_; }
  std::optional<std::size_t> find(const VarKey& k) const {
    auto it = index_.find(k);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const VariableMap& o) const { return keys_ == o.keys_; }

 private:
  std::vector<VarKey> keys_;
  std::map<VarKey, std::size_t> index_;
};

struct QuboTerm {
  std::uint32_t u;
  std::uint32_t v;
  double value;
  bool operator==(const QuboTerm&) const = default;
};

/// Upper-triangular QUBO: energy(q) = sum_{u <= v} Q_uv q_u q_v + constant.
/// Diagonal entries hold the linear terms (q^2 = q). Terms are kept sorted by
/// (u, v) with no duplicates.
class QuboProblem {
 public:
  QuboProblem() = default;
  QuboProblem(std::size_t n, std::vector<QuboTerm> terms, double constant, VariableMap varmap = {})
      : n_(n), terms_(std::move(terms)), constant_(constant), varmap_(std::move(varmap)) {
    detail::require(std::isfinite(constant_), "QUBO constant must be finite");
    detail::require(varmap_.size() == 0 || varmap_.size() == n_,
                    "variable map size does not match variable count");
    for (const auto& t : terms_) {
      detail::require(t.u <= t.v, "QUBO term must satisfy u <= v");
      detail::require(t.v < n_, "QUBO term index out of range");
      detail::require(std::isfinite(t.value), "QUBO coefficient must be finite");
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    auto w = terms_.begin();
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
      if (w != terms_.begin() && std::prev(w)->u == it->u && std::prev(w)->v == it->v)
        std::prev(w)->value += it->value;
      else
        *w++ = *it;
    }
    terms_.erase(w, terms_.end());
  }

  std::size_t n() const noexcept { return n_; }
  std::span<const QuboTerm> terms() const noexcept { return terms_; }
  double constant() const noexcept { return constant_; }
  const VariableMap& varmap() const noexcept { return varmap_; }

  double coefficient(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), std::pair{u, v}, [](const auto& t, auto key) {
      return std::pair<std::size_t, std::size_t>{t.u, t.v} < key;
    });
    return it != terms_.end() && it->u == u && it->v == v ? it->value : 0.0;
  }

  /// Coefficients and constant only; the variable map is not compared.
  bool same_coefficients(const QuboProblem& o) const {
    return n_ == o.n_ && constant_ == o.constant_ && terms_ == o.terms_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<QuboTerm> terms_;
  double constant_ = 0.0;
  VariableMap varmap_;
};

inline double qubo_energy(const QuboProblem& problem, std::span<const std::uint8_t> bits) {
  detail::require(bits.size() == problem.n(), "bit vector length " + std::to_string(bits.size()) +
                                                  " does not match variable count " +
                                                  std::to_string(problem.n()));
  double e = problem.constant();
  for (const auto& t : problem.terms())
    if (bits[t.u] && bits[t.v]) e += t.value;
  return e;
}

/// Copy with the ROI pixels set to zero.
inline Image mask_roi(const Image& image, const RoiSpec& roi) {
  require_roi_fits(roi, image.width(), image.height());
  Image out = image;
  for (std::size_t r = roi.y0; r < roi.y0 + roi.h; ++r)
    for (std::size_t c = roi.x0; c < roi.x0 + roi.w; ++c) out(r, c) = 0.0;
  return out;
}

/// Signed residual projection: measured - forward_project(background).
inline Sinogram residual_sinogram(const Sinogram& measured, const Image& background,
                                  const SystemMatrix& matrix) {
  detail::require(measured.n_angles() == matrix.geometry().n_angles() &&
                      measured.n_detectors() == matrix.geometry().n_detectors,
                  "measured sinogram does not match the system matrix geometry");
  Sinogram res = forward_project(background, matrix);
  auto m = measured.values();
  auto out = res.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] - out[i];
  return res;
}

inline constexpr double kDefaultPruneTol = 1e-12;

/// Expands sum_rays (residual - projection of the encoded ROI)^2 into QUBO
/// form over VariableMap::for_roi(roi, K). The constant collects the squared
/// residual over every ray, so energy equals the full objective. `linear_bias`
/// (empty, or one value per variable) is added to the diagonal.
inline QuboProblem build_roi_qubo(const Sinogram& residual, const SystemMatrix& matrix,
                                  const RoiSpec& roi, const LevelScheme& levels,
                                  double prune_tol = kDefaultPruneTol,
                                  std::span<const double> linear_bias = {}) {
  require_roi_fits(roi, matrix.width(), matrix.height());
  detail::require(residual.n_angles() == matrix.geometry().n_angles() &&
                      residual.n_detectors() == matrix.geometry().n_detectors,
                  "residual sinogram does not match the system matrix geometry");
  const std::size_t m = roi.pixel_count();
  const std::size_t K = levels.size();
  const std::size_t n = m * K;
  detail::require(n <= UINT32_MAX, "too many QUBO variables");
  detail::require(linear_bias.empty() || linear_bias.size() == n,
                  "linear bias must have one entry per variable");

  std::vector<std::ptrdiff_t> local(matrix.n_pixels(), -1);
  for (std::size_t r = 0; r < roi.h; ++r)
    for (std::size_t c = 0; c < roi.w; ++c)
      local[(roi.y0 + r) * matrix.width() + roi.x0 + c] = static_cast<std::ptrdiff_t>(r * roi.w + c);

  // Packed upper-triangular Gram matrix of the ROI columns, and A^T residual.
  auto packed = [m](std::size_t i, std::size_t j) { return i * m - i * (i - 1) / 2 + (j - i); };
  std::vector<double> gram(m * (m + 1) / 2, 0.0);
  std::vector<double> corr(m, 0.0);
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> hits;
  auto rho = residual.values();
  for (std::size_t ray = 0; ray < matrix.n_rays(); ++ray) {
    constant += rho[ray] * rho[ray];
    hits.clear();
    for (const auto& e : matrix.row(ray))
      if (local[e.pixel] >= 0) hits.emplace_back(static_cast<std::size_t>(local[e.pixel]), e.weight);
    // row entries are pixel-sorted, so local indices are increasing
    for (std::size_t a = 0; a < hits.size(); ++a) {
      corr[hits[a].first] += hits[a].second * rho[ray];
      for (std::size_t b = a; b < hits.size(); ++b)
        gram[packed(hits[a].first, hits[b].first)] += hits[a].second * hits[b].second;
    }
  }

  std::vector<QuboTerm> terms;
  auto emit = [&](std::size_t u, std::size_t v, double value) {
    if (std::abs(value) >= prune_tol)
      terms.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), value});
  };
  for (std::size_t l1 = 0; l1 < m; ++l1) {
    for (std::size_t k1 = 0; k1 < K; ++k1) {
      const std::size_t u = l1 * K + k1;
      const double w1 = levels.weight(k1);
      double diag = w1 * w1 * gram[packed(l1, l1)] - 2.0 * w1 * corr[l1];
      if (!linear_bias.empty()) diag += linear_bias[u];
      emit(u, u, diag);
      for (std::size_t k2 = k1 + 1; k2 < K; ++k2)
        emit(u, l1 * K + k2, 2.0 * w1 * levels.weight(k2) * gram[packed(l1, l1)]);
      for (std::size_t l2 = l1 + 1; l2 < m; ++l2) {
        const double g = gram[packed(l1, l2)];
        if (g == 0.0) continue;
        for (std::size_t k2 = 0; k2 < K; ++k2) emit(u, l2 * K + k2, 2.0 * w1 * levels.weight(k2) * g);
      }
    }
  }
  return QuboProblem(n, std::move(terms), constant, VariableMap::for_roi(roi, K));
}

/// ROI patch with pixel value sum_k weight(k) * q_k for its variables.
inline Image decode_solution(std::span<const std::uint8_t> bits, const VariableMap& varmap,
                             const LevelScheme& levels, const RoiSpec& roi) {
  detail::require(bits.size() == varmap.size(), "bit vector length does not match variable map");
  const std::size_t K = levels.size();
  std::vector<std::uint8_t> per_pixel(roi.pixel_count() * K, 0);
  for (std::size_t id = 0; id < varmap.size(); ++id) {
    const auto& key = varmap.key(id);
    detail::require(roi.contains(key.row, key.col) && key.level < K,
                    "variable map entry outside the ROI or level range");
    per_pixel[((key.row - roi.y0) * roi.w + (key.col - roi.x0)) * K + key.level] = bits[id] ? 1 : 0;
  }
  Image patch(roi.w, roi.h);
  auto out = patch.values();
  for (std::size_t l = 0; l < roi.pixel_count(); ++l)
    out[l] = levels.decode_pixel(std::span<const std::uint8_t>(per_pixel).subspan(l * K, K));
  return patch;
}

/// Inverse of decode_solution for discrete patches: alpha_m sets levels 0..m,
/// zero sets nothing. Bits follow VariableMap::for_roi ordering.
inline Bits encode_ground_truth(const Image& patch, const LevelScheme& levels) {
  const std::size_t K = levels.size();
  Bits bits(patch.size() * K, 0);
  auto vals = patch.values();
  for (std::size_t l = 0; l < vals.size(); ++l) {
    const long m = levels.level_of(vals[l]);
    if (m == -2)
      throw invalid_argument("pixel value " + std::to_string(vals[l]) +
                             " is not zero or a level of the scheme");
    for (long k = 0; k <= m; ++k) bits[l * K + static_cast<std::size_t>(k)] = 1;
  }
  return bits;
}

}  // namespace roiqubo
