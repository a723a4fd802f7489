#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/io.hpp"
#include "roiqubo/pipeline.hpp"

namespace roiqubo {

// Flat "key = value" run configuration, '#' starts a comment. Every key is
// optional; see README for the defaults.

class config_error : public parse_error {
 public:
  using parse_error::parse_error;
};

struct RunConfig {
  PipelineConfig pipeline;
  std::filesystem::path output_dir = "out";
};

namespace detail {

inline bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("expected a boolean, got '" + std::string(v) + "'", line);
}

template <class Enum>
Enum parse_enum(std::string_view v, std::initializer_list<Enum> options, std::size_t line) {
  std::string names;
  for (Enum e : options) {
    if (v == to_string(e)) return e;
    names += (names.empty() ? "" : "|") + to_string(e);
  }
  throw config_error("expected one of " + names + ", got '" + std::string(v) + "'", line);
}

inline std::vector<double> parse_levels(std::string_view v, std::size_t line) {
  std::vector<double> out;
  for (auto tok : split(v, ',')) out.push_back(parse_double(tok, line));
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& is) {
  RunConfig rc;
  PipelineConfig& p = rc.pipeline;
  std::optional<std::size_t> roi_x0, roi_y0, roi_w, roi_h;
  std::set<std::string> seen;

  using Setter = std::function<void(std::string_view, std::size_t)>;
  auto count = [](std::size_t& dst) -> Setter {
    return [&dst](std::string_view v, std::size_t l) { dst = parse_count(v, l); };
  };
  auto optional_count = [](std::optional<std::size_t>& dst) -> Setter {
    return [&dst](std::string_view v, std::size_t l) { dst = parse_count(v, l); };
  };
  auto real = [](double& dst) -> Setter {
    return [&dst](std::string_view v, std::size_t l) { dst = parse_double(v, l); };
  };
  const std::map<std::string, Setter, std::less<>> setters{
      {"seed", [&](std::string_view v, std::size_t l) { p.phantom.seed = parse_count(v, l); }},
      {"image_size", count(p.phantom.size)},
      {"roi.x0", optional_count(roi_x0)},
      {"roi.y0", optional_count(roi_y0)},
      {"roi.w", optional_count(roi_w)},
      {"roi.h", optional_count(roi_h)},
      {"levels",
       [&](std::string_view v, std::size_t l) {
         try {
           p.phantom.levels = LevelScheme(detail::parse_levels(v, l));
         } catch (const invalid_argument& e) {
           throw config_error(e.what(), l);
         }
       }},
      {"phantom.background_shapes", count(p.phantom.n_background_shapes)},
      {"phantom.roi_shapes", count(p.phantom.n_roi_shapes)},
      {"n_angles", count(p.n_angles)},
      {"n_detectors",
       [&](std::string_view v, std::size_t l) {
         if (v == "auto")
           p.n_detectors.reset();
         else
           p.n_detectors = parse_count(v, l);
       }},
      {"coarse.method",
       [&](std::string_view v, std::size_t l) {
         p.coarse_method = detail::parse_enum(v, {CoarseMethod::qtr, CoarseMethod::fbp, CoarseMethod::sart}, l);
       }},
      {"coarse.n_angles", count(p.coarse_n_angles)},
      {"coarse.reduced_size", count(p.qtr_reduced_size)},
      {"coarse.detector_factor",
       [&](std::string_view v, std::size_t l) {
         p.qtr_detector_factor = v == "auto" ? 0 : parse_count(v, l);
       }},
      {"sigma", real(p.sigma)},
      {"sart.iterations", count(p.sart.n_iterations)},
      {"sart.relaxation", real(p.sart.relaxation)},
      {"sart.order",
       [&](std::string_view v, std::size_t l) {
         p.sart.order = detail::parse_enum(v, {SartOrder::interleaved, SartOrder::sequential}, l);
       }},
      {"solver.kind",
       [&](std::string_view v, std::size_t l) {
         p.solver.kind = detail::parse_enum(
             v, {SolverKind::none, SolverKind::exhaustive, SolverKind::anneal, SolverKind::greedy}, l);
       }},
      {"solver.restarts", count(p.solver.restarts)},
      {"solver.sweeps", count(p.solver.sweeps)},
      {"solver.seed", [&](std::string_view v, std::size_t l) { p.solver.seed = parse_count(v, l); }},
      {"solver.exhaustive_cap", count(p.solver.exhaustive_cap)},
      {"clip_negative", [&](std::string_view v, std::size_t l) { p.clip_negative = detail::parse_bool(v, l); }},
      {"background",
       [&](std::string_view v, std::size_t l) {
         p.background = detail::parse_enum(v, {BackgroundMode::coarse, BackgroundMode::oracle}, l);
       }},
      {"prune_tol", real(p.prune_tol)},
      {"output_dir", [&](std::string_view v, std::size_t) { rc.output_dir = std::string(v); }},
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view t = line;
    if (auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = trim(t);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw config_error("expected 'key = value'", lineno);
    const std::string key(trim(t.substr(0, eq)));
    const std::string_view value = trim(t.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw config_error("unknown key '" + key + "'", lineno);
    if (!seen.insert(key).second) throw config_error("duplicate key '" + key + "'", lineno);
    if (value.empty()) throw config_error("empty value for '" + key + "'", lineno);
    try {
      it->second(value, lineno);
    } catch (const config_error&) {
      throw;
    } catch (const parse_error& e) {
      throw config_error(std::string("key '") + key + "': " + e.what(), 0);
    }
  }

  // Unspecified ROI fields default to a centered square of side image_size / 4.
  const std::size_t n = p.phantom.size;
  const std::size_t side = std::max<std::size_t>(1, n / 4);
  p.phantom.roi.w = roi_w.value_or(side);
  p.phantom.roi.h = roi_h.value_or(side);
  p.phantom.roi.x0 = roi_x0.value_or(n >= p.phantom.roi.w ? (n - p.phantom.roi.w) / 2 : 0);
  p.phantom.roi.y0 = roi_y0.value_or(n >= p.phantom.roi.h ? (n - p.phantom.roi.h) / 2 : 0);

  try {
    p.validate();
  } catch (const invalid_argument& e) {
    throw config_error(e.what(), 0);
  }
  return rc;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_run_config(is);
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot read config file '" + path.string() + "'", 0);
  return parse_run_config(is);
}

/// Fully resolved configuration in the same key = value format; parsing the
/// output reproduces the configuration.
inline void write_run_config(std::ostream& os, const RunConfig& rc) {
  const PipelineConfig& p = rc.pipeline;
  std::string levels;
  for (double a : p.levels().alphas()) levels += (levels.empty() ? "" : ",") + format_double(a);
  os << "seed = " << p.phantom.seed << '\n'
     << "image_size = " << p.phantom.size << '\n'
     << "roi.x0 = " << p.roi().x0 << '\n'
     << "roi.y0 = " << p.roi().y0 << '\n'
     << "roi.w = " << p.roi().w << '\n'
     << "roi.h = " << p.roi().h << '\n'
     << "levels = " << levels << '\n'
     << "phantom.background_shapes = " << p.phantom.n_background_shapes << '\n'
     << "phantom.roi_shapes = " << p.phantom.n_roi_shapes << '\n'
     << "n_angles = " << p.n_angles << '\n'
     << "n_detectors = " << (p.n_detectors ? std::to_string(*p.n_detectors) : "auto") << '\n'
     << "coarse.method = " << to_string(p.coarse_method) << '\n'
     << "coarse.n_angles = " << p.coarse_n_angles << '\n'
     << "coarse.reduced_size = " << p.qtr_reduced_size << '\n'
     << "coarse.detector_factor = "
     << (p.qtr_detector_factor ? std::to_string(p.qtr_detector_factor) : "auto") << '\n'
     << "sigma = " << format_double(p.sigma) << '\n'
     << "sart.iterations = " << p.sart.n_iterations << '\n'
     << "sart.relaxation = " << format_double(p.sart.relaxation) << '\n'
     << "sart.order = " << to_string(p.sart.order) << '\n'
     << "solver.kind = " << to_string(p.solver.kind) << '\n'
     << "solver.restarts = " << p.solver.restarts << '\n'
     << "solver.sweeps = " << p.solver.sweeps << '\n'
     << "solver.seed = " << p.solver.seed << '\n'
     << "solver.exhaustive_cap = " << p.solver.exhaustive_cap << '\n'
     << "clip_negative = " << (p.clip_negative ? "true" : "false") << '\n'
     << "background = " << to_string(p.background) << '\n'
     << "prune_tol = " << format_double(p.prune_tol) << '\n'
     << "output_dir = " << rc.output_dir.string() << '\n';
}

}  // namespace roiqubo
