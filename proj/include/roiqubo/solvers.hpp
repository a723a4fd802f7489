#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/qubo.hpp"
#include "roiqubo/random.hpp"

namespace roiqubo {

struct SolverResult {
  Bits bits;
  double energy = 0.0;  // includes the constant
  std::uint64_t evaluations = 0;
  std::chrono::duration<double> wall_time{};
  std::string solver_id;
  std::uint64_t seed = 0;
  std::vector<double> best_trace;  // best-so-far energy after each restart
};

struct AnnealSchedule {
  std::size_t n_sweeps = 2000;
  std::size_t restarts = 10;
  double t_initial = 1.0;
  double t_final = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(n_sweeps >= 1 && restarts >= 1, "anneal sweeps and restarts must be >= 1");
    detail::require(t_final > 0 && t_initial > t_final && std::isfinite(t_initial),
                    "anneal temperatures must satisfy T_initial > T_final > 0");
  }

  /// T_initial = max |Q_uu| (1 if all diagonals vanish), T_final = 1e-3 T_initial.
  static AnnealSchedule defaults_for(const QuboProblem& problem, std::uint64_t seed = 0,
                                     std::size_t restarts = 10, std::size_t n_sweeps = 2000) {
    double t = 0.0;
    for (const auto& term : problem.terms())
      if (term.u == term.v) t = std::max(t, std::abs(term.value));
    if (t == 0.0) t = 1.0;
    return AnnealSchedule{n_sweeps, restarts, t, 1e-3 * t, seed};
  }
};

namespace detail {

// Neighbor lists with per-variable local fields h_u = sum_{v != u} Q_uv q_v,
// so a single flip costs O(1) to score and O(degree) to apply.
class FlipState {
 public:
  explicit FlipState(const QuboProblem& p) : diag_(p.n(), 0.0), ptr_(p.n() + 1, 0) {
    for (const auto& t : p.terms()) {
      if (t.u == t.v) {
        diag_[t.u] += t.value;
      } else {
        ++ptr_[t.u + 1];
        ++ptr_[t.v + 1];
      }
    }
    for (std::size_t i = 0; i < p.n(); ++i) ptr_[i + 1] += ptr_[i];
    nbr_.resize(ptr_.back());
    coef_.resize(ptr_.back());
    std::vector<std::size_t> fill(ptr_.begin(), ptr_.end() - 1);
    for (const auto& t : p.terms()) {
      if (t.u == t.v) continue;
      nbr_[fill[t.u]] = t.v;
      coef_[fill[t.u]++] = t.value;
      nbr_[fill[t.v]] = t.u;
      coef_[fill[t.v]++] = t.value;
    }
    bits_.assign(p.n(), 0);
    field_.assign(p.n(), 0.0);
    energy_ = p.constant();
    constant_ = p.constant();
  }

  std::size_t n() const noexcept { return diag_.size(); }
  const Bits& bits() const noexcept { return bits_; }
  double energy() const noexcept { return energy_; }
  double diag(std::size_t u) const { return diag_[u]; }

  void reset(const Bits& bits) {
    bits_ = bits;
    std::fill(field_.begin(), field_.end(), 0.0);
    energy_ = constant_;
    for (std::size_t u = 0; u < n(); ++u) {
      if (!bits_[u]) continue;
      energy_ += diag_[u];
      for (std::size_t k = ptr_[u]; k < ptr_[u + 1]; ++k) {
        field_[nbr_[k]] += coef_[k];
        if (nbr_[k] > u && bits_[nbr_[k]]) energy_ += coef_[k];
      }
    }
  }

  double delta(std::size_t u) const { return (bits_[u] ? -1.0 : 1.0) * (diag_[u] + field_[u]); }

  void flip(std::size_t u) {
    const double d = delta(u);
    const double sign = bits_[u] ? -1.0 : 1.0;
    bits_[u] ^= 1;
    energy_ += d;
    for (std::size_t k = ptr_[u]; k < ptr_[u + 1]; ++k) field_[nbr_[k]] += sign * coef_[k];
  }

 private:
  std::vector<double> diag_;
  std::vector<std::size_t> ptr_;
  std::vector<std::size_t> nbr_;
  std::vector<double> coef_;
  Bits bits_;
  std::vector<double> field_;
  double energy_ = 0.0;
  double constant_ = 0.0;
};

// Visits all 2^n assignments in Gray-code order. `visit(energy, code)` gets
// the assignment as a big-endian integer: variable i is bit (n - 1 - i).
template <class Visitor>
void gray_enumerate(const QuboProblem& p, Visitor&& visit) {
  FlipState st(p);
  const std::size_t n = p.n();
  std::uint64_t code = 0;
  visit(st.energy(), code);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    const auto i = static_cast<std::size_t>(std::countr_zero(g));
    st.flip(i);
    code ^= std::uint64_t{1} << (n - 1 - i);
    visit(st.energy(), code);
  }
}

inline Bits bits_from_code(std::uint64_t code, std::size_t n) {
  Bits bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (code >> (n - 1 - i)) & 1u;
  return bits;
}

inline void require_exhaustive_cap(const QuboProblem& p, std::size_t cap) {
  detail::require(cap <= 62, "exhaustive cap must be at most 62");
  if (p.n() > cap)
    throw capacity_error("exhaustive solver supports at most " + std::to_string(cap) +
                             " variables, problem has " + std::to_string(p.n()),
                         cap);
}

}  // namespace detail

inline constexpr std::size_t kDefaultExhaustiveCap = 24;
// Energies within this absolute distance count as ties.
inline constexpr double kTieTolerance = 1e-9;

/// Global minimum by enumeration. Ties (within kTieTolerance) go to the
/// assignment with the smallest big-endian integer value.
inline SolverResult solve_exhaustive(const QuboProblem& problem,
                                     std::size_t cap = kDefaultExhaustiveCap) {
  detail::require_exhaustive_cap(problem, cap);
  const auto start = std::chrono::steady_clock::now();
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_code = 0;
  detail::gray_enumerate(problem, [&](double e, std::uint64_t code) {
    if (e < best - kTieTolerance || (e <= best + kTieTolerance && code < best_code)) {
      best = e;
      best_code = code;
    }
  });
  SolverResult res;
  res.bits = detail::bits_from_code(best_code, problem.n());
  res.energy = qubo_energy(problem, res.bits);
  res.evaluations = std::uint64_t{1} << problem.n();
  res.solver_id = "exhaustive";
  res.best_trace = {res.energy};
  res.wall_time = std::chrono::steady_clock::now() - start;
  return res;
}

/// Number of assignments whose energy is within `tol` of the global minimum.
inline std::uint64_t count_minimizers(const QuboProblem& problem, double tol = kTieTolerance,
                                      std::size_t cap = kDefaultExhaustiveCap) {
  detail::require_exhaustive_cap(problem, cap);
  double best = std::numeric_limits<double>::infinity();
  detail::gray_enumerate(problem, [&](double e, std::uint64_t) { best = std::min(best, e); });
  std::uint64_t count = 0;
  detail::gray_enumerate(problem, [&](double e, std::uint64_t) { count += e <= best + tol; });
  return count;
}

/// Single-bit-flip Metropolis annealing on a geometric temperature ladder.
/// Restart r draws from its own stream derived from (seed, r); the best
/// assignment over all restarts is returned.
inline SolverResult solve_anneal(const QuboProblem& problem, const AnnealSchedule& schedule) {
  schedule.validate();
  detail::require(problem.n() >= 1, "annealing needs at least one variable");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = problem.n();
  detail::FlipState st(problem);

  std::vector<double> temps(schedule.n_sweeps);
  const double ratio = schedule.t_final / schedule.t_initial;
  for (std::size_t s = 0; s < schedule.n_sweeps; ++s)
    temps[s] = schedule.n_sweeps == 1
                   ? schedule.t_initial
                   : schedule.t_initial *
                         std::pow(ratio, static_cast<double>(s) / static_cast<double>(schedule.n_sweeps - 1));

  SolverResult res;
  res.energy = std::numeric_limits<double>::infinity();
  Bits init(n);
  for (std::size_t r = 0; r < schedule.restarts; ++r) {
    auto rng = detail::make_stream(schedule.seed, r);
    for (auto& b : init) b = rng() >> 63;
    st.reset(init);
    Bits best = st.bits();
    double best_e = st.energy();
    for (double t : temps) {
      const double beta = 1.0 / t;
      for (std::size_t u = 0; u < n; ++u) {
        const double d = st.delta(u);
        if (d <= 0.0 || detail::uniform01(rng) < std::exp(-d * beta)) {
          st.flip(u);
          if (st.energy() < best_e) {
            best_e = st.energy();
            best = st.bits();
          }
        }
      }
    }
    res.evaluations += schedule.n_sweeps * n;
    const double exact = qubo_energy(problem, best);
    if (exact < res.energy) {
      res.energy = exact;
      res.bits = best;
    }
    res.best_trace.push_back(res.energy);
  }
  res.solver_id = "anneal";
  res.seed = schedule.seed;
  res.wall_time = std::chrono::steady_clock::now() - start;
  return res;
}

/// Steepest-descent single-bit flips from a seeded random start; stops at a
/// 1-flip local minimum.
inline SolverResult solve_greedy(const QuboProblem& problem, std::uint64_t seed = 0) {
  detail::require(problem.n() >= 1, "greedy descent needs at least one variable");
  const auto start = std::chrono::steady_clock::now();
  detail::FlipState st(problem);
  auto rng = detail::make_stream(seed, 0);
  Bits init(problem.n());
  for (auto& b : init) b = rng() >> 63;
  st.reset(init);

  SolverResult res;
  while (true) {
    std::size_t arg = problem.n();
    double best = -1e-12;  // ignore round-off sized improvements
    for (std::size_t u = 0; u < problem.n(); ++u) {
      const double d = st.delta(u);
      if (d < best) {
        best = d;
        arg = u;
      }
    }
    res.evaluations += problem.n();
    if (arg == problem.n()) break;
    st.flip(arg);
  }
  res.bits = st.bits();
  res.energy = qubo_energy(problem, res.bits);
  res.solver_id = "greedy";
  res.seed = seed;
  res.best_trace = {res.energy};
  res.wall_time = std::chrono::steady_clock::now() - start;
  return res;
}

}  // namespace roiqubo
