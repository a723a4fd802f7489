#include <gtest/gtest.h>

#include <random>

#include "roiqubo/roiqubo.hpp"

using namespace roiqubo;

namespace {

PipelineConfig tiny(std::uint64_t seed, BackgroundMode bg, CoarseMethod method = CoarseMethod::sart) {
  PipelineConfig cfg;
  cfg.phantom.seed = seed;
  cfg.phantom.size = 16;
  cfg.phantom.roi = {6, 6, 4, 4};
  cfg.phantom.levels = LevelScheme({1.0});
  cfg.n_angles = 30;
  cfg.coarse_method = method;
  cfg.background = bg;
  cfg.solver.kind = SolverKind::exhaustive;
  return cfg;
}

Image random_binary(std::mt19937_64& rng, std::size_t n, double value) {
  Image img(n, n);
  for (double& v : img.values()) v = (rng() & 1u) ? value : 0.0;
  return img;
}

}  // namespace

TEST(CoarseQtr, ZeroSinogramGivesZeroImage) {
  auto g = build_geometry(10, std::nullopt, 8);
  SolverConfig s;
  s.kind = SolverKind::exhaustive;
  auto r = coarse_qtr(Sinogram(10, g.n_detectors), g, 8, 4, 1, LevelScheme({0.5}), s);
  EXPECT_EQ(r.image, Image(4, 4));
  EXPECT_EQ(r.n_variables, 16u);
  EXPECT_EQ(r.solve.energy, 0.0);
}

TEST(CoarseQtr, RecoversTinyPhantomExactly) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto truth = random_binary(rng, 4, 1.0);
    auto g = build_geometry(12, std::nullopt, 4);
    auto m = build_system_matrix(g, 4, 4);
    auto sino = forward_project(truth, m);
    const LevelScheme levels({1.0});
    // uniqueness of the optimum checked on the identical problem
    auto problem = build_roi_qubo(sino, m, {0, 0, 4, 4}, levels);
    if (count_minimizers(problem) != 1) continue;
    ++checked;
    SolverConfig s;
    s.kind = SolverKind::exhaustive;
    auto r = coarse_qtr(sino, g, 4, 4, 1, levels, s);
    EXPECT_EQ(r.image, truth) << "trial " << trial;
  }
  EXPECT_GE(checked, 5);
}

TEST(CoarseQtr, EnergyNotAboveAllZero) {
  PhantomSpec spec;
  spec.size = 24;
  spec.roi = {8, 8, 8, 8};
  auto truth = generate_phantom(spec);
  auto g = build_geometry(20, std::nullopt, 24);
  auto sino = forward_project(truth, build_system_matrix(g, 24, 24));
  SolverConfig s;
  s.kind = SolverKind::anneal;
  s.restarts = 2;
  s.sweeps = 100;
  auto r = coarse_qtr(sino, g, 24, 6, 2, spec.levels, s);
  // all-zero energy is the constant: squared norm of the summed sinogram
  const auto reduced = downsample_sinogram(sino, 2);
  double c = 0;
  for (double v : reduced.values()) c += v * v;
  EXPECT_LE(r.solve.energy, c + 1e-9);
  EXPECT_EQ(r.image.width(), 6u);
}

TEST(CoarseQtr, ScaledMatrixMatchesSummedBins) {
  // A centered block projected at full resolution and summed over f bins
  // should be close to the reduced-grid projection of the same block. The
  // block stays off the border: some reduced bins lie exactly on the reduced
  // grid edge, where the full-resolution bin pair is only half inside.
  const std::size_t n = 24, R = 6, f = 2;
  auto g = build_geometry(8, 34, n);
  Image full_img(n, n), reduced_img(R, R);
  for (std::size_t r = 4; r < 20; ++r)
    for (std::size_t c = 4; c < 20; ++c) full_img(r, c) = 1.0;
  for (std::size_t r = 1; r < 5; ++r)
    for (std::size_t c = 1; c < 5; ++c) reduced_img(r, c) = 1.0;
  auto full = downsample_sinogram(forward_project(full_img, build_system_matrix(g, n, n)), f);
  const double ratio = static_cast<double>(n) / R;
  ProjectionGeometry rg{g.angles, 17, g.detector_spacing * f / ratio};
  auto reduced = forward_project(reduced_img, build_system_matrix(rg, R, R).scaled(ratio * f));
  double num = 0, den = 0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    num += std::pow(full.values()[i] - reduced.values()[i], 2);
    den += std::pow(full.values()[i], 2);
  }
  EXPECT_LT(std::sqrt(num / den), 0.05);
}

TEST(GlobalEstimate, ClassicalBranchesAreIdentity) {
  auto img = generate_phantom(PhantomSpec{});
  EXPECT_EQ(make_global_estimate(img, CoarseMethod::sart, 48, 2.0), img);
  EXPECT_EQ(make_global_estimate(img, CoarseMethod::fbp, 48, 2.0), img);
  EXPECT_EQ(make_global_estimate(img, CoarseMethod::qtr, 48, 0.0), img);
}

TEST(GlobalEstimate, QtrBranchUpsamples) {
  Image coarse(4, 4, 0.5);
  auto g = make_global_estimate(coarse, CoarseMethod::qtr, 16, 1.0);
  ASSERT_EQ(g.width(), 16u);
  for (double v : g.values()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(InsertRoi, Examples) {
  auto truth = generate_phantom(PhantomSpec{});
  const RoiSpec roi = PhantomSpec{}.roi;
  auto masked = mask_roi(truth, roi);
  EXPECT_EQ(insert_roi(masked, Image(roi.w, roi.h), roi), masked);
  EXPECT_EQ(insert_roi(masked, extract_roi(truth, roi), roi), truth);
  Image patch(roi.w, roi.h, 0.25);
  EXPECT_EQ(extract_roi(insert_roi(truth, patch, roi), roi), patch);
  EXPECT_THROW(insert_roi(truth, Image(roi.w + 1, roi.h), roi), invalid_argument);
}

TEST(RunPipeline, OracleBackgroundRecoversRoiExactly) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto r = run_pipeline(tiny(seed, BackgroundMode::oracle));
    ASSERT_TRUE(r.roi_problem.has_value());
    if (count_minimizers(*r.roi_problem) != 1) continue;
    ++checked;
    EXPECT_EQ(r.metrics_final.rmse_roi, 0.0) << "seed " << seed;
  }
  EXPECT_GE(checked, 3);
}

TEST(RunPipeline, SartBackgroundNoWorseThanDirectSart) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto refined = run_pipeline(tiny(seed, BackgroundMode::coarse));
    auto direct_cfg = tiny(seed, BackgroundMode::coarse);
    direct_cfg.solver.kind = SolverKind::none;
    auto direct = run_pipeline(direct_cfg);
    EXPECT_LE(refined.metrics_final.rmse_roi, direct.metrics_final.rmse_roi) << "seed " << seed;
  }
}

TEST(RunPipeline, NoSolverKeepsGlobalEstimate) {
  for (auto method : {CoarseMethod::fbp, CoarseMethod::sart}) {
    auto cfg = tiny(2, BackgroundMode::coarse, method);
    cfg.solver.kind = SolverKind::none;
    auto r = run_pipeline(cfg);
    EXPECT_EQ(r.final_image, r.global);
    EXPECT_FALSE(r.roi_problem.has_value());
    EXPECT_FALSE(r.roi_solve.has_value());
  }
}

TEST(RunPipeline, FinalIsMaskedGlobalWithDecodedPatch) {
  for (auto method : {CoarseMethod::fbp, CoarseMethod::sart, CoarseMethod::qtr}) {
    auto cfg = tiny(3, BackgroundMode::coarse, method);
    cfg.qtr_reduced_size = 4;
    cfg.solver.kind = SolverKind::anneal;
    cfg.solver.restarts = 2;
    cfg.solver.sweeps = 200;
    auto r = run_pipeline(cfg);
    auto patch = decode_solution(r.roi_solve->bits, r.roi_problem->varmap(), cfg.levels(), cfg.roi());
    EXPECT_EQ(r.final_image, insert_roi(mask_roi(r.global, cfg.roi()), patch, cfg.roi()));
    EXPECT_EQ(r.masked_background, mask_roi(r.global, cfg.roi()));
  }
}

TEST(RunPipeline, CoarseOverrideLeavesRefinementGeometry) {
  auto cfg = tiny(4, BackgroundMode::coarse, CoarseMethod::fbp);
  cfg.coarse_n_angles = 90;
  auto r = run_pipeline(cfg);
  EXPECT_EQ(r.coarse_geometry.n_angles(), 90u);
  EXPECT_EQ(r.measurement_geometry.n_angles(), 30u);
  EXPECT_EQ(r.measured.n_angles(), 30u);
  EXPECT_EQ(r.residual.n_angles(), 30u);
  auto m = build_system_matrix(r.measurement_geometry, 16, 16);
  EXPECT_TRUE(r.roi_problem->same_coefficients(build_roi_qubo(r.residual, m, cfg.roi(), cfg.levels())));
  EXPECT_EQ(r.residual, residual_sinogram(r.measured, r.masked_background, m));

  auto same = tiny(4, BackgroundMode::coarse, CoarseMethod::fbp);
  EXPECT_NE(run_pipeline(same).coarse, r.coarse);
}

TEST(RunPipeline, QtrCoarseUsesReducedGrid) {
  auto cfg = tiny(5, BackgroundMode::coarse, CoarseMethod::qtr);
  cfg.qtr_reduced_size = 4;
  cfg.solver.kind = SolverKind::exhaustive;
  auto r = run_pipeline(cfg);
  EXPECT_EQ(r.coarse.width(), 4u);
  EXPECT_EQ(r.global.width(), 16u);
  ASSERT_TRUE(r.coarse_solve.has_value());
  EXPECT_EQ(r.coarse_solve->n_variables, 16u);
}

TEST(RunPipeline, ClipNegativeRemovesNegatives) {
  auto cfg = tiny(6, BackgroundMode::coarse, CoarseMethod::fbp);
  cfg.solver.kind = SolverKind::none;
  cfg.clip_negative = true;
  auto r = run_pipeline(cfg);
  for (double v : r.global.values()) EXPECT_GE(v, 0.0);
  EXPECT_LT(r.metrics_coarse.min, 0.0);
}

TEST(RunPipeline, Deterministic) {
  auto cfg = tiny(7, BackgroundMode::coarse);
  cfg.solver.kind = SolverKind::anneal;
  cfg.solver.restarts = 3;
  cfg.solver.sweeps = 300;
  auto a = run_pipeline(cfg), b = run_pipeline(cfg);
  EXPECT_EQ(a.final_image, b.final_image);
  EXPECT_EQ(a.roi_solve->bits, b.roi_solve->bits);
  EXPECT_EQ(a.residual, b.residual);
}

TEST(RunPipeline, StageErrorsAreLabeled) {
  auto cfg = tiny(1, BackgroundMode::coarse);
  cfg.phantom.roi = {0, 0, 5, 5};  // 25 variables
  cfg.solver.exhaustive_cap = 20;
  try {
    run_pipeline(cfg);
    FAIL() << "expected capacity_error";
  } catch (const capacity_error& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'refine'"), std::string::npos) << e.what();
  }
  auto bad = tiny(1, BackgroundMode::coarse);
  bad.phantom.roi = {14, 0, 4, 4};
  EXPECT_THROW(run_pipeline(bad), invalid_argument);
}

TEST(Variants, StandardFive) {
  auto v = standard_variants();
  ASSERT_EQ(v.size(), 5u);
  PipelineConfig base;
  base.solver.kind = SolverKind::none;
  EXPECT_EQ(variant_config(base, v[0]).solver.kind, SolverKind::none);
  EXPECT_EQ(variant_config(base, v[4]).solver.kind, SolverKind::anneal);
  EXPECT_EQ(variant_config(base, v[2]).coarse_method, CoarseMethod::qtr);
}
