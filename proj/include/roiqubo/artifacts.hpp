#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "roiqubo/io.hpp"
#include "roiqubo/metrics.hpp"
#include "roiqubo/pipeline.hpp"
#include "roiqubo/qubo_io.hpp"
#include "roiqubo/run_config.hpp"

namespace roiqubo {

namespace fs = std::filesystem;

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

inline void write_text(const fs::path& p, const std::string& text) {
  auto os = detail::open_out(p);
  os << text;
  if (!os) throw std::runtime_error("write to '" + p.string() + "' failed");
}

/// metrics.csv rows: final image, global estimate, coarse image.
inline std::vector<LabeledReport> pipeline_metric_rows(const PipelineResult& r) {
  return {{"final", r.metrics_final}, {"global", r.metrics_global}, {"coarse", r.metrics_coarse}};
}

/// Writes the per-run artifact set into `dir` (created if missing). The QUBO
/// and variable map are only written when refinement ran.
inline void write_pipeline_artifacts(const PipelineResult& r, const RunConfig& rc, const fs::path& dir) {
  ensure_directory(dir);
  save_csv(dir / "ground_truth.csv", r.ground_truth);
  save_csv(dir / "sinogram.csv", r.measured);
  save_csv(dir / "coarse.csv", r.coarse);
  save_csv(dir / "global.csv", r.global);
  save_csv(dir / "residual.csv", r.residual);
  if (r.roi_problem) {
    save_qubo(dir / "roi_problem.qubo.txt", *r.roi_problem);
    auto os = detail::open_out(dir / "roi_varmap.csv");
    write_varmap_csv(os, r.roi_problem->varmap());
  }
  save_csv(dir / "final.csv", r.final_image);
  write_text(dir / "metrics.csv", emit_comparison_table(pipeline_metric_rows(r)));

  std::ostringstream manifest;
  write_run_config(manifest, rc);
  write_text(dir / "run_manifest.txt", manifest.str());

  if (r.roi_solve || r.coarse_solve) {
    std::ostringstream os;
    auto dump = [&os](const std::string& prefix, const SolverResult& s) {
      os << prefix << ".solver = " << s.solver_id << '\n'
         << prefix << ".energy = " << format_double(s.energy) << '\n'
         << prefix << ".evaluations = " << s.evaluations << '\n'
         << prefix << ".seed = " << s.seed << '\n'
         << prefix << ".variables = " << s.bits.size() << '\n';
    };
    if (r.coarse_solve) dump("coarse", r.coarse_solve->solve);
    if (r.roi_solve) dump("roi", *r.roi_solve);
    write_text(dir / "solver_result.txt", os.str());
  }
}

struct ComparisonRun {
  std::string label;
  PipelineResult result;
};

/// Runs every variant on one shared phantom, writing each variant's artifacts
/// into dir/<label>/ and the table into dir/comparison.csv.
inline std::vector<ComparisonRun> run_comparison(const RunConfig& rc, const std::vector<Variant>& variants,
                                                 const fs::path& dir) {
  detail::require(!variants.empty(), "comparison needs at least one variant");
  rc.pipeline.validate();
  const Image truth = generate_phantom(rc.pipeline.phantom);
  ensure_directory(dir);
  std::vector<ComparisonRun> runs;
  std::vector<LabeledReport> rows;
  for (const auto& v : variants) {
    RunConfig vrc = rc;
    vrc.pipeline = variant_config(rc.pipeline, v);
    vrc.output_dir = dir / v.label;
    try {
      runs.push_back({v.label, run_pipeline(vrc.pipeline, truth)});
    } catch (const capacity_error& e) {
      throw capacity_error("variant '" + v.label + "': " + e.what(), e.cap());
    } catch (const std::exception& e) {
      throw std::runtime_error("variant '" + v.label + "': " + e.what());
    }
    write_pipeline_artifacts(runs.back().result, vrc, vrc.output_dir);
    rows.emplace_back(v.label, runs.back().result.metrics_final);
  }
  write_text(dir / "comparison.csv", emit_comparison_table(rows));
  return runs;
}

}  // namespace roiqubo
