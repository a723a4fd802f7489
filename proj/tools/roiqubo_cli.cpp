// roiqubo: phantom generation, projection, coarse reconstruction, ROI QUBO
// refinement and comparisons driven by a flat key = value config file.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime or capacity error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roiqubo/roiqubo.hpp"

namespace fs = std::filesystem;
using namespace roiqubo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string output_dir;
  bool pgm = false;
  std::string image, sinogram, global;
  std::string truth, recon, label = "recon";
  std::vector<std::string> variants;
};

RunConfig load(const Options& o) {
  RunConfig rc = o.config.empty() ? parse_run_config_text("") : load_run_config(o.config);
  if (!o.output_dir.empty()) rc.output_dir = o.output_dir;
  return rc;
}

void require_square(const Image& img, const PipelineConfig& p, const std::string& what) {
  if (img.width() != p.image_size() || img.height() != p.image_size())
    throw invalid_argument(what + " is " + std::to_string(img.width()) + "x" +
                           std::to_string(img.height()) + ", config image_size is " +
                           std::to_string(p.image_size()));
}

void require_shape(const Sinogram& s, const ProjectionGeometry& g, const std::string& what) {
  if (s.n_angles() != g.n_angles() || s.n_detectors() != g.n_detectors)
    throw invalid_argument(what + " is " + std::to_string(s.n_angles()) + "x" +
                           std::to_string(s.n_detectors()) + ", geometry expects " +
                           std::to_string(g.n_angles()) + "x" + std::to_string(g.n_detectors));
}

Image truth_or_file(const Options& o, const PipelineConfig& p) {
  if (o.image.empty()) return generate_phantom(p.phantom);
  Image img = load_image_csv(o.image);
  require_square(img, p, "image '" + o.image + "'");
  return img;
}

void cmd_phantom(const Options& o) {
  const RunConfig rc = load(o);
  const Image img = generate_phantom(rc.pipeline.phantom);
  ensure_directory(rc.output_dir);
  save_csv(rc.output_dir / "ground_truth.csv", img);
  if (o.pgm) {
    std::ostringstream os;
    write_pgm(os, img);
    write_text(rc.output_dir / "ground_truth.pgm", os.str());
  }
}

void cmd_project(const Options& o) {
  const RunConfig rc = load(o);
  const auto& p = rc.pipeline;
  const Image img = truth_or_file(o, p);
  const auto g = p.measurement_geometry();
  ensure_directory(rc.output_dir);
  save_csv(rc.output_dir / "sinogram.csv", forward_project(img, build_system_matrix(g, img.width(), img.height())));
}

// Coarse reconstruction from a sinogram in the coarse geometry.
std::pair<Image, Image> reconstruct(const Sinogram& sino, const PipelineConfig& p) {
  const std::size_t n = p.image_size();
  const auto g = p.coarse_geometry();
  require_shape(sino, g, "coarse sinogram");
  Image coarse(1, 1);
  switch (p.coarse_method) {
    case CoarseMethod::fbp: coarse = fbp(sino, g, n, n, p.fbp); break;
    case CoarseMethod::sart: coarse = sart(sino, build_system_matrix(g, n, n), p.sart); break;
    case CoarseMethod::qtr:
      coarse = coarse_qtr(sino, g, n, p.qtr_reduced_size, p.resolved_detector_factor(), p.levels(),
                          p.solver, p.prune_tol)
                   .image;
      break;
  }
  Image global = make_global_estimate(coarse, p.coarse_method, n, p.sigma);
  if (p.clip_negative) global = clip_negative(global);
  return {coarse, global};
}

void cmd_recon(const Options& o) {
  const RunConfig rc = load(o);
  const auto& p = rc.pipeline;
  Sinogram sino(1, 1);
  if (o.sinogram.empty()) {
    const Image truth = truth_or_file(o, p);
    sino = forward_project(truth, build_system_matrix(p.coarse_geometry(), p.image_size(), p.image_size()));
  } else {
    sino = load_sinogram_csv(o.sinogram);
  }
  auto [coarse, global] = reconstruct(sino, p);
  ensure_directory(rc.output_dir);
  save_csv(rc.output_dir / "coarse.csv", coarse);
  save_csv(rc.output_dir / "global.csv", global);
}

// Residual and ROI QUBO against a given measured sinogram and global
// estimate. With solver.kind = none the problem is exported unsolved and the
// final image is the global estimate.
void cmd_refine(const Options& o) {
  const RunConfig rc = load(o);
  const auto& p = rc.pipeline;
  const std::size_t n = p.image_size();
  const auto g = p.measurement_geometry();

  std::optional<Image> truth;
  auto get_truth = [&]() -> const Image& {
    if (!truth) truth = truth_or_file(o, p);
    return *truth;
  };
  const SystemMatrix m = build_system_matrix(g, n, n);
  const Sinogram measured = o.sinogram.empty() ? forward_project(get_truth(), m) : load_sinogram_csv(o.sinogram);
  require_shape(measured, g, "measured sinogram");

  Image global(1, 1);
  if (!o.global.empty()) {
    global = load_image_csv(o.global);
    require_square(global, p, "global estimate '" + o.global + "'");
  } else {
    const Sinogram coarse_sino = p.coarse_geometry() == g ? measured
                                                          : forward_project(get_truth(), build_system_matrix(p.coarse_geometry(), n, n));
    global = reconstruct(coarse_sino, p).second;
  }

  const Image& background = p.background == BackgroundMode::oracle ? get_truth() : global;
  const Image masked = mask_roi(background, p.roi());
  const Sinogram residual = residual_sinogram(measured, masked, m);
  const QuboProblem problem = build_roi_qubo(residual, m, p.roi(), p.levels(), p.prune_tol);

  ensure_directory(rc.output_dir);
  save_csv(rc.output_dir / "residual.csv", residual);
  save_qubo(rc.output_dir / "roi_problem.qubo.txt", problem);
  {
    auto os = roiqubo::detail::open_out(rc.output_dir / "roi_varmap.csv");
    write_varmap_csv(os, problem.varmap());
  }
  if (p.solver.kind == SolverKind::none) {
    save_csv(rc.output_dir / "final.csv", global);
    return;
  }
  const SolverResult r = solve(problem, p.solver);
  const Image patch = decode_solution(r.bits, problem.varmap(), p.levels(), p.roi());
  save_csv(rc.output_dir / "final.csv", insert_roi(masked, patch, p.roi()));
  std::ostringstream os;
  os << "roi.solver = " << r.solver_id << "\nroi.energy = " << format_double(r.energy)
     << "\nroi.evaluations = " << r.evaluations << "\nroi.seed = " << r.seed
     << "\nroi.variables = " << r.bits.size() << '\n';
  write_text(rc.output_dir / "solver_result.txt", os.str());
}

void cmd_pipeline(const Options& o) {
  const RunConfig rc = load(o);
  const PipelineResult r = o.image.empty() ? run_pipeline(rc.pipeline) : run_pipeline(rc.pipeline, truth_or_file(o, rc.pipeline));
  write_pipeline_artifacts(r, rc, rc.output_dir);
  std::cout << emit_comparison_table(pipeline_metric_rows(r));
}

void cmd_compare(const Options& o) {
  const RunConfig rc = load(o);
  std::vector<Variant> chosen;
  const auto all = standard_variants();
  if (o.variants.empty()) {
    chosen = all;
  } else {
    for (const auto& name : o.variants) {
      auto it = std::find_if(all.begin(), all.end(), [&](const Variant& v) { return v.label == name; });
      if (it == all.end()) throw config_error("unknown variant '" + name + "'", 0);
      chosen.push_back(*it);
    }
  }
  const auto runs = run_comparison(rc, chosen, rc.output_dir);
  std::vector<LabeledReport> rows;
  for (const auto& run : runs) rows.emplace_back(run.label, run.result.metrics_final);
  std::cout << emit_comparison_table(rows);
}

void cmd_metrics(const Options& o) {
  const RunConfig rc = load(o);
  const Image truth = load_image_csv(o.truth);
  const Image recon = load_image_csv(o.recon);
  const std::string table = emit_comparison_table({{o.label, compute_metrics(truth, recon, rc.pipeline.roi())}});
  ensure_directory(rc.output_dir);
  write_text(rc.output_dir / "metrics.csv", table);
  std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROI-restricted QUBO refinement for reduced-angle CT"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "key = value run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--output-dir", o.output_dir, "overrides output_dir from the config");

  auto* phantom = app.add_subcommand("phantom", "write ground_truth.csv");
  phantom->add_flag("--pgm", o.pgm, "also write ground_truth.pgm");

  auto* project = app.add_subcommand("project", "write sinogram.csv (measurement geometry)");
  project->add_option("--image", o.image, "image CSV to project instead of the configured phantom");

  auto* recon = app.add_subcommand("recon", "write coarse.csv and global.csv");
  recon->add_option("--sinogram", o.sinogram, "sinogram CSV in the coarse geometry");
  recon->add_option("--image", o.image, "image CSV to project when no sinogram is given");

  auto* refine = app.add_subcommand("refine", "write residual, ROI QUBO, variable map and final.csv");
  refine->add_option("--sinogram", o.sinogram, "measured sinogram CSV");
  refine->add_option("--global", o.global, "global estimate CSV");
  refine->add_option("--image", o.image, "ground truth CSV used where the others are missing");

  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write all artifacts");
  pipeline->add_option("--image", o.image, "ground truth CSV instead of the configured phantom");

  auto* compare = app.add_subcommand("compare", "run pipeline variants on one phantom");
  compare->add_option("--variants", o.variants, "subset of direct_fbp,direct_sart,qtr_qtr,fbp_qtr,sart_qtr")
      ->delimiter(',');

  auto* metrics = app.add_subcommand("metrics", "ROI and non-ROI errors of a reconstruction");
  metrics->add_option("--truth", o.truth, "ground truth CSV")->required();
  metrics->add_option("--recon", o.recon, "reconstruction CSV")->required();
  metrics->add_option("--label", o.label, "row label in the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*phantom) cmd_phantom(o);
    else if (*project) cmd_project(o);
    else if (*recon) cmd_recon(o);
    else if (*refine) cmd_refine(o);
    else if (*pipeline) cmd_pipeline(o);
    else if (*compare) cmd_compare(o);
    else if (*metrics) cmd_metrics(o);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
