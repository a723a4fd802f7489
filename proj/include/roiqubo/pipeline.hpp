#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "roiqubo/classical.hpp"
#include "roiqubo/error.hpp"
#include "roiqubo/geometry.hpp"
#include "roiqubo/image.hpp"
#include "roiqubo/levels.hpp"
#include "roiqubo/metrics.hpp"
#include "roiqubo/phantom.hpp"
#include "roiqubo/qubo.hpp"
#include "roiqubo/solvers.hpp"
#include "roiqubo/system_matrix.hpp"

namespace roiqubo {

enum class CoarseMethod { qtr, fbp, sart };
enum class SolverKind { none, exhaustive, anneal, greedy };
enum class BackgroundMode { coarse, oracle };

inline std::string to_string(CoarseMethod m) {
  switch (m) {
    case CoarseMethod::qtr: return "qtr";
    case CoarseMethod::fbp: return "fbp";
    case CoarseMethod::sart: return "sart";
  }
  return "?";
}
inline std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::none: return "none";
    case SolverKind::exhaustive: return "exhaustive";
    case SolverKind::anneal: return "anneal";
    case SolverKind::greedy: return "greedy";
  }
  return "?";
}
inline std::string to_string(BackgroundMode b) { return b == BackgroundMode::oracle ? "oracle" : "coarse"; }

struct SolverConfig {
  SolverKind kind = SolverKind::anneal;
  std::size_t restarts = 10;
  std::size_t sweeps = 2000;
  std::uint64_t seed = 0;
  std::size_t exhaustive_cap = kDefaultExhaustiveCap;
};

/// Runs the configured solver; SolverKind::none is rejected.
inline SolverResult solve(const QuboProblem& problem, const SolverConfig& cfg) {
  switch (cfg.kind) {
    case SolverKind::exhaustive: {
      auto r = solve_exhaustive(problem, cfg.exhaustive_cap);
      r.seed = cfg.seed;
      return r;
    }
    case SolverKind::anneal:
      return solve_anneal(problem,
                          AnnealSchedule::defaults_for(problem, cfg.seed, cfg.restarts, cfg.sweeps));
    case SolverKind::greedy: return solve_greedy(problem, cfg.seed);
    case SolverKind::none: break;
  }
  throw invalid_argument("no solver selected");
}

struct PipelineConfig {
  PhantomSpec phantom;
  std::size_t n_angles = 60;
  std::optional<std::size_t> n_detectors;  // empty: auto
  CoarseMethod coarse_method = CoarseMethod::sart;
  std::size_t coarse_n_angles = 0;  // 0: reuse the measurement views
  std::size_t qtr_reduced_size = 12;
  std::size_t qtr_detector_factor = 0;  // 0: auto, see resolved_detector_factor
  double sigma = 1.0;
  SartConfig sart;
  FbpConfig fbp;
  SolverConfig solver;
  bool clip_negative = false;
  BackgroundMode background = BackgroundMode::coarse;
  double prune_tol = kDefaultPruneTol;

  std::size_t image_size() const noexcept { return phantom.size; }
  const RoiSpec& roi() const noexcept { return phantom.roi; }
  const LevelScheme& levels() const noexcept { return phantom.levels; }

  ProjectionGeometry measurement_geometry() const {
    return build_geometry(n_angles, n_detectors, image_size());
  }
  ProjectionGeometry coarse_geometry() const {
    return build_geometry(coarse_n_angles == 0 ? n_angles : coarse_n_angles, n_detectors, image_size());
  }

  /// Explicit factor, or the largest divisor of the detector count not
  /// exceeding image_size / reduced_size.
  std::size_t resolved_detector_factor() const {
    if (qtr_detector_factor != 0) return qtr_detector_factor;
    const std::size_t nd = coarse_geometry().n_detectors;
    std::size_t f = std::max<std::size_t>(1, image_size() / std::max<std::size_t>(1, qtr_reduced_size));
    while (nd % f != 0) --f;
    return f;
  }

  void validate() const {
    detail::require(phantom.size >= 1, "image_size must be positive");
    require_roi_fits(phantom.roi, phantom.size, phantom.size);
    detail::require(n_angles >= 1, "n_angles must be at least 1");
    detail::require(!n_detectors || *n_detectors >= 1, "n_detectors must be at least 1");
    sart.validate();
    detail::require(sigma >= 0 && std::isfinite(sigma), "sigma must be non-negative");
    detail::require(prune_tol >= 0, "prune_tol must be non-negative");
    detail::require(solver.restarts >= 1 && solver.sweeps >= 1, "solver restarts and sweeps must be >= 1");
    if (coarse_method == CoarseMethod::qtr) {
      detail::require(qtr_reduced_size >= 1 && qtr_reduced_size <= phantom.size,
                      "coarse.reduced_size must lie in [1, image_size]");
      const std::size_t f = resolved_detector_factor();
      detail::require(coarse_geometry().n_detectors % f == 0,
                      "coarse.detector_factor must divide the detector count");
    }
  }
};

struct CoarseQtrResult {
  Image image;  // reduced_size x reduced_size
  SolverResult solve;
  std::size_t n_variables = 0;
};

/// Full-image QUBO reconstruction on a reduced grid: detector bins are summed
/// in groups of `detector_factor`, the reduced grid spans the same field of
/// view, and its system matrix is rescaled so projections are expressed in
/// full-resolution pixel lengths per summed bin.
inline CoarseQtrResult coarse_qtr(const Sinogram& sino, const ProjectionGeometry& geometry,
                                  std::size_t image_size, std::size_t reduced_size,
                                  std::size_t detector_factor, const LevelScheme& levels,
                                  SolverConfig solver, double prune_tol = kDefaultPruneTol) {
  detail::require(reduced_size >= 1 && reduced_size <= image_size,
                  "reduced size must lie in [1, image size]");
  const Sinogram reduced_sino = downsample_sinogram(sino, detector_factor);
  const double pixel_ratio = static_cast<double>(image_size) / static_cast<double>(reduced_size);

  ProjectionGeometry rg;
  rg.angles = geometry.angles;
  rg.n_detectors = reduced_sino.n_detectors();
  rg.detector_spacing =
      geometry.detector_spacing * static_cast<double>(detector_factor) / pixel_ratio;
  const SystemMatrix matrix = build_system_matrix(rg, reduced_size, reduced_size)
                                  .scaled(pixel_ratio * static_cast<double>(detector_factor));

  const RoiSpec whole{0, 0, reduced_size, reduced_size};
  const QuboProblem problem = build_roi_qubo(reduced_sino, matrix, whole, levels, prune_tol);
  if (solver.kind == SolverKind::none) solver.kind = SolverKind::anneal;
  CoarseQtrResult out{Image(1, 1), solve(problem, solver), problem.n()};
  out.image = decode_solution(out.solve.bits, problem.varmap(), levels, whole);
  return out;
}

/// Coarse image at full resolution: QUBO-based coarse images are upsampled
/// and smoothed, classical ones pass through unchanged.
inline Image make_global_estimate(const Image& coarse, CoarseMethod method, std::size_t target_size,
                                  double sigma) {
  if (method != CoarseMethod::qtr) return coarse;
  return upsample_and_smooth(coarse, target_size, target_size, sigma);
}

struct PipelineResult {
  Image ground_truth;
  ProjectionGeometry measurement_geometry;
  ProjectionGeometry coarse_geometry;
  Sinogram measured;
  Image coarse;             // as reconstructed (reduced grid for qtr)
  Image global;             // after the upsample/smooth branch and optional clipping
  Image masked_background;  // background with the ROI zeroed
  Sinogram residual;        // always against the measurement geometry
  std::optional<CoarseQtrResult> coarse_solve;
  std::optional<QuboProblem> roi_problem;
  std::optional<SolverResult> roi_solve;
  Image final_image;
  MetricsReport metrics_final;
  MetricsReport metrics_global;
  MetricsReport metrics_coarse;  // coarse upsampled without smoothing when needed
};

namespace detail {
template <class Fn>
auto run_stage(const char* label, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = std::string("stage '") + label + "': ";
  try {
    return fn();
  } catch (const capacity_error& e) {
    throw capacity_error(prefix + e.what(), e.cap());
  } catch (const invalid_argument& e) {
    throw invalid_argument(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}
}  // namespace detail

/// Runs the whole pipeline on a given ground truth image.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const Image& truth) {
  cfg.validate();
  detail::require(truth.width() == cfg.image_size() && truth.height() == cfg.image_size(),
                  "ground truth does not match image_size");
  const std::size_t n = cfg.image_size();
  const RoiSpec& roi = cfg.roi();
  PipelineResult res;
  res.ground_truth = truth;

  const SystemMatrix meas_matrix = detail::run_stage("project", [&] {
    res.measurement_geometry = cfg.measurement_geometry();
    auto m = build_system_matrix(res.measurement_geometry, n, n);
    res.measured = forward_project(truth, m);
    return m;
  });

  detail::run_stage("coarse", [&] {
    res.coarse_geometry = cfg.coarse_geometry();
    const bool same = res.coarse_geometry == res.measurement_geometry;
    std::optional<SystemMatrix> own;
    if (!same) own = build_system_matrix(res.coarse_geometry, n, n);
    const SystemMatrix& cm = same ? meas_matrix : *own;
    const Sinogram coarse_sino = same ? res.measured : forward_project(truth, cm);
    switch (cfg.coarse_method) {
      case CoarseMethod::fbp:
        res.coarse = fbp(coarse_sino, res.coarse_geometry, n, n, cfg.fbp);
        break;
      case CoarseMethod::sart:
        res.coarse = sart(coarse_sino, cm, cfg.sart);
        break;
      case CoarseMethod::qtr:
        res.coarse_solve = coarse_qtr(coarse_sino, res.coarse_geometry, n, cfg.qtr_reduced_size,
                                      cfg.resolved_detector_factor(), cfg.levels(), cfg.solver,
                                      cfg.prune_tol);
        res.coarse = res.coarse_solve->image;
        break;
    }
    res.global = make_global_estimate(res.coarse, cfg.coarse_method, n, cfg.sigma);
    if (cfg.clip_negative) res.global = clip_negative(res.global);
  });

  detail::run_stage("residual", [&] {
    const Image& background = cfg.background == BackgroundMode::oracle ? truth : res.global;
    res.masked_background = mask_roi(background, roi);
    res.residual = residual_sinogram(res.measured, res.masked_background, meas_matrix);
  });

  if (cfg.solver.kind == SolverKind::none) {
    res.final_image = res.global;
  } else {
    detail::run_stage("refine", [&] {
      res.roi_problem = build_roi_qubo(res.residual, meas_matrix, roi, cfg.levels(), cfg.prune_tol);
      res.roi_solve = solve(*res.roi_problem, cfg.solver);
      const Image patch = decode_solution(res.roi_solve->bits, res.roi_problem->varmap(), cfg.levels(), roi);
      res.final_image = insert_roi(res.masked_background, patch, roi);
    });
  }

  detail::run_stage("metrics", [&] {
    res.metrics_final = compute_metrics(truth, res.final_image, roi);
    res.metrics_global = compute_metrics(truth, res.global, roi);
    const Image coarse_full =
        res.coarse.width() == n ? res.coarse : upsample_and_smooth(res.coarse, n, n, 0.0);
    res.metrics_coarse = compute_metrics(truth, coarse_full, roi);
  });
  return res;
}

/// Generates the configured phantom and runs the pipeline on it.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const Image truth = detail::run_stage("phantom", [&] { return generate_phantom(cfg.phantom); });
  return run_pipeline(cfg, truth);
}

/// The five pipeline variants of the comparison table.
struct Variant {
  std::string label;
  CoarseMethod method;
  bool refine;
};

inline std::vector<Variant> standard_variants() {
  return {{"direct_fbp", CoarseMethod::fbp, false},
          {"direct_sart", CoarseMethod::sart, false},
          {"qtr_qtr", CoarseMethod::qtr, true},
          {"fbp_qtr", CoarseMethod::fbp, true},
          {"sart_qtr", CoarseMethod::sart, true}};
}

/// `base` with the variant's coarse method; direct variants skip refinement.
inline PipelineConfig variant_config(const PipelineConfig& base, const Variant& v) {
  PipelineConfig cfg = base;
  cfg.coarse_method = v.method;
  if (!v.refine)
    cfg.solver.kind = SolverKind::none;
  else if (cfg.solver.kind == SolverKind::none)
    cfg.solver.kind = SolverKind::anneal;
  return cfg;
}

}  // namespace roiqubo
