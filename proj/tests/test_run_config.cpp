#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "roiqubo/artifacts.hpp"
#include "roiqubo/run_config.hpp"

using namespace roiqubo;
namespace fs = std::filesystem;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_run_config_text(text);
  } catch (const config_error& e) {
    return e.line();
  }
  return 999;
}

std::string manifest(const RunConfig& rc) {
  std::ostringstream os;
  write_run_config(os, rc);
  return os.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("roiqubo_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfig, EmptyFileGivesDefaults) {
  auto rc = parse_run_config_text("");
  const auto& p = rc.pipeline;
  EXPECT_EQ(p.image_size(), 48u);
  EXPECT_EQ(p.roi(), (RoiSpec{18, 18, 12, 12}));
  EXPECT_EQ(p.levels(), LevelScheme({0.5, 1.0}));
  EXPECT_EQ(p.n_angles, 60u);
  EXPECT_FALSE(p.n_detectors.has_value());
  EXPECT_EQ(p.coarse_method, CoarseMethod::sart);
  EXPECT_EQ(p.solver.kind, SolverKind::anneal);
  EXPECT_EQ(p.sart.n_iterations, 20u);
  EXPECT_EQ(p.sart.relaxation, 1.0);
  EXPECT_EQ(p.sart.order, SartOrder::interleaved);
  EXPECT_EQ(p.sigma, 1.0);
  EXPECT_FALSE(p.clip_negative);
  EXPECT_EQ(rc.output_dir, fs::path("out"));
}

TEST(RunConfig, ParsesKeysCommentsAndWhitespace) {
  auto rc = parse_run_config_text(
      "# comment line\n"
      "  seed = 7   # trailing\n"
      "image_size=32\n"
      "roi.x0 = 2\nroi.y0 = 3\nroi.w = 5\nroi.h = 6\n"
      "levels = 0.2, 0.5,0.9\n"
      "n_detectors = 50\n"
      "coarse.method = qtr\ncoarse.reduced_size = 8\ncoarse.detector_factor = 2\n"
      "sart.order = sequential\nsolver.kind = greedy\nclip_negative = true\nbackground = oracle\n"
      "output_dir = results/run1\n");
  const auto& p = rc.pipeline;
  EXPECT_EQ(p.phantom.seed, 7u);
  EXPECT_EQ(p.roi(), (RoiSpec{2, 3, 5, 6}));
  EXPECT_EQ(p.levels(), LevelScheme({0.2, 0.5, 0.9}));
  EXPECT_EQ(p.n_detectors, 50u);
  EXPECT_EQ(p.coarse_method, CoarseMethod::qtr);
  EXPECT_EQ(p.resolved_detector_factor(), 2u);
  EXPECT_EQ(p.solver.kind, SolverKind::greedy);
  EXPECT_EQ(p.sart.order, SartOrder::sequential);
  EXPECT_TRUE(p.clip_negative);
  EXPECT_EQ(p.background, BackgroundMode::oracle);
  EXPECT_EQ(rc.output_dir, fs::path("results/run1"));
}

TEST(RunConfig, DefaultRoiIsCenteredQuarter) {
  EXPECT_EQ(parse_run_config_text("image_size = 16\n").pipeline.roi(), (RoiSpec{6, 6, 4, 4}));
  EXPECT_EQ(parse_run_config_text("image_size = 20\nroi.w = 6\n").pipeline.roi(), (RoiSpec{7, 7, 6, 5}));
}

TEST(RunConfig, UnknownKeyIsNamed) {
  try {
    parse_run_config_text("seed = 1\nsolver.temperature = 3\n");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("solver.temperature"), std::string::npos);
  }
}

TEST(RunConfig, BadValuesRejected) {
  EXPECT_EQ(error_line("seed = 1\nseed = 2\n"), 2u);
  EXPECT_EQ(error_line("n_angles\n"), 1u);
  EXPECT_EQ(error_line("n_angles = \n"), 1u);
  EXPECT_EQ(error_line("n_angles = -3\n"), 0u);
  EXPECT_EQ(error_line("sigma = abc\n"), 0u);
  EXPECT_EQ(error_line("coarse.method = magic\n"), 1u);
  EXPECT_EQ(error_line("clip_negative = maybe\n"), 1u);
  EXPECT_EQ(error_line("seed = 2\nsart.order = random\n"), 2u);
  EXPECT_EQ(error_line("levels = 0.5,0.2\n"), 1u);
  EXPECT_EQ(error_line("n_angles = 0\n"), 0u);
  EXPECT_EQ(error_line("sart.relaxation = 3\n"), 0u);
  EXPECT_EQ(error_line("image_size = 16\nroi.x0 = 14\n"), 0u);
  EXPECT_EQ(error_line("coarse.method = qtr\ncoarse.detector_factor = 7\n"), 0u);
}

TEST(RunConfig, ManifestRoundTrips) {
  auto rc = parse_run_config_text(
      "seed = 11\nlevels = 0.1,0.30000000000000004,1.7\nsigma = 0.75\nsolver.seed = 9\n"
      "n_detectors = 71\ncoarse.n_angles = 180\noutput_dir = x y\n");
  const auto text = manifest(rc);
  auto again = parse_run_config_text(text);
  EXPECT_EQ(manifest(again), text);
  EXPECT_EQ(again.pipeline.levels(), rc.pipeline.levels());
  EXPECT_EQ(again.pipeline.sigma, 0.75);
  EXPECT_EQ(again.output_dir, fs::path("x y"));
  EXPECT_EQ(manifest(parse_run_config_text("")), manifest(parse_run_config_text(manifest(parse_run_config_text("")))));
}

TEST(RunConfig, MissingFileIsConfigError) {
  EXPECT_THROW(load_run_config("/nonexistent/roiqubo.cfg"), config_error);
}

TEST(Artifacts, PipelineWritesFixedFileSet) {
  auto rc = parse_run_config_text("image_size = 16\nn_angles = 20\nlevels = 1.0\nsolver.kind = exhaustive\n");
  const auto dir = scratch("artifacts") / "nested";
  write_pipeline_artifacts(run_pipeline(rc.pipeline), rc, dir);
  for (const char* f : {"ground_truth.csv", "sinogram.csv", "coarse.csv", "global.csv", "residual.csv",
                        "roi_problem.qubo.txt", "roi_varmap.csv", "final.csv", "metrics.csv",
                        "run_manifest.txt", "solver_result.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(parse_run_config_text(slurp(dir / "run_manifest.txt")).pipeline.solver.kind, SolverKind::exhaustive);
  EXPECT_EQ(load_qubo(dir / "roi_problem.qubo.txt").n(), 16u);
  std::istringstream metrics(slurp(dir / "metrics.csv"));
  auto rows = parse_comparison_table(metrics);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].first, "final");
  fs::remove_all(scratch("artifacts"));
}

TEST(Artifacts, ComparisonSharesPhantom) {
  auto rc = parse_run_config_text("image_size = 16\nn_angles = 20\ncoarse.reduced_size = 4\n"
                                  "solver.restarts = 2\nsolver.sweeps = 100\n");
  const auto dir = scratch("compare");
  auto runs = run_comparison(rc, standard_variants(), dir);
  ASSERT_EQ(runs.size(), 5u);
  const auto gt = slurp(dir / "direct_fbp" / "ground_truth.csv");
  for (const auto& v : standard_variants()) EXPECT_EQ(slurp(dir / v.label / "ground_truth.csv"), gt);
  std::istringstream table(slurp(dir / "comparison.csv"));
  auto rows = parse_comparison_table(table);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[4].first, "sart_qtr");
  EXPECT_FALSE(fs::exists(dir / "direct_sart" / "roi_problem.qubo.txt"));
  fs::remove_all(dir);
}

TEST(Artifacts, RunsAreByteIdentical) {
  auto rc = parse_run_config_text("image_size = 16\nn_angles = 20\nsolver.restarts = 2\nsolver.sweeps = 100\n");
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_pipeline_artifacts(run_pipeline(rc.pipeline), rc, a);
  write_pipeline_artifacts(run_pipeline(rc.pipeline), rc, b);
  for (const auto& entry : fs::directory_iterator(a))
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
  fs::remove_all(a);
  fs::remove_all(b);
}
