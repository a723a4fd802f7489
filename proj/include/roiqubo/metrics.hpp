#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/image.hpp"
#include "roiqubo/io.hpp"

namespace roiqubo {

struct MetricsReport {
  double rmse_roi = 0.0;
  double mae_roi = 0.0;
  double rmse_nonroi = 0.0;
  double mae_nonroi = 0.0;
  std::size_t roi_pixels = 0;
  std::size_t nonroi_pixels = 0;
  double min = 0.0;  // of the evaluated reconstruction
  double max = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

/// RMSE and MAE over the ROI and over its strict complement. An empty
/// complement reports zero error.
inline MetricsReport compute_metrics(const Image& truth, const Image& recon, const RoiSpec& roi) {
  detail::require(truth.width() == recon.width() && truth.height() == recon.height(),
                  "truth and reconstruction dimensions differ");
  require_roi_fits(roi, truth.width(), truth.height());
  double sq_in = 0, abs_in = 0, sq_out = 0, abs_out = 0;
  MetricsReport m;
  for (std::size_t r = 0; r < truth.height(); ++r)
    for (std::size_t c = 0; c < truth.width(); ++c) {
      const double e = truth(r, c) - recon(r, c);
      if (roi.contains(r, c)) {
        sq_in += e * e;
        abs_in += std::abs(e);
        ++m.roi_pixels;
      } else {
        sq_out += e * e;
        abs_out += std::abs(e);
        ++m.nonroi_pixels;
      }
    }
  const auto in = static_cast<double>(m.roi_pixels);
  m.rmse_roi = std::sqrt(sq_in / in);
  m.mae_roi = abs_in / in;
  if (m.nonroi_pixels > 0) {
    const auto out = static_cast<double>(m.nonroi_pixels);
    m.rmse_nonroi = std::sqrt(sq_out / out);
    m.mae_nonroi = abs_out / out;
  }
  auto v = recon.values();
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  m.min = *lo;
  m.max = *hi;
  return m;
}

inline constexpr const char* kComparisonHeader = "pipeline,rmse_roi,mae_roi,rmse_nonroi,mae_nonroi,min,max";

using LabeledReport = std::pair<std::string, MetricsReport>;

/// One CSV row per report, input order preserved, full-precision values.
inline std::string emit_comparison_table(const std::vector<LabeledReport>& rows) {
  std::ostringstream os;
  os << kComparisonHeader << '\n';
  for (const auto& [label, m] : rows) {
    detail::require(label.find_first_of(",\n") == std::string::npos,
                    "pipeline label must not contain ',' or newlines");
    os << label << ',' << format_double(m.rmse_roi) << ',' << format_double(m.mae_roi) << ','
       << format_double(m.rmse_nonroi) << ',' << format_double(m.mae_nonroi) << ','
       << format_double(m.min) << ',' << format_double(m.max) << '\n';
  }
  return os.str();
}

/// Inverse of emit_comparison_table. Pixel counts are not part of the table.
inline std::vector<LabeledReport> parse_comparison_table(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line) || trim(line) != kComparisonHeader)
    throw parse_error("missing comparison table header", 1);
  ++lineno;
  std::vector<LabeledReport> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != 7) throw parse_error("comparison row needs 7 fields", lineno);
    MetricsReport m;
    m.rmse_roi = parse_double(f[1], lineno);
    m.mae_roi = parse_double(f[2], lineno);
    m.rmse_nonroi = parse_double(f[3], lineno);
    m.mae_nonroi = parse_double(f[4], lineno);
    m.min = parse_double(f[5], lineno);
    m.max = parse_double(f[6], lineno);
    rows.emplace_back(std::string(f[0]), m);
  }
  return rows;
}

}  // namespace roiqubo
