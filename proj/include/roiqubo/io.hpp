#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/image.hpp"

namespace roiqubo {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Parses a full token as a finite double; throws parse_error otherwise.
inline double parse_double(std::string_view tok, std::size_t line = 0) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty() || !std::isfinite(v))
    throw parse_error("not a finite number: '" + std::string(tok) + "'", line);
  return v;
}

inline std::size_t parse_count(std::string_view tok, std::size_t line = 0) {
  tok = trim(tok);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw parse_error("not a non-negative integer: '" + std::string(tok) + "'", line);
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

namespace detail {

inline void write_matrix_csv(std::ostream& os, std::span<const double> values, std::size_t cols) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << format_double(values[i]) << ((i + 1) % cols == 0 ? '\n' : ',');
  }
}

struct ParsedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

inline ParsedMatrix read_matrix_csv(std::istream& is) {
  ParsedMatrix m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    auto fields = split(t, ',');
    if (m.rows == 0)
      m.cols = fields.size();
    else if (fields.size() != m.cols)
      throw parse_error("expected " + std::to_string(m.cols) + " columns, found " +
                            std::to_string(fields.size()),
                        lineno);
    for (auto f : fields) m.values.push_back(parse_double(f, lineno));
    ++m.rows;
  }
  if (m.rows == 0) throw parse_error("empty matrix file", 0);
  return m;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open '" + p.string() + "' for reading");
  return is;
}

}  // namespace detail

// CSV: one matrix row per line, comma separated, no header.

inline void write_csv(std::ostream& os, const Image& img) {
  detail::write_matrix_csv(os, img.values(), img.width());
}
inline void write_csv(std::ostream& os, const Sinogram& sino) {
  detail::write_matrix_csv(os, sino.values(), sino.n_detectors());
}

inline Image read_image_csv(std::istream& is) {
  auto m = detail::read_matrix_csv(is);
  return Image(m.cols, m.rows, std::move(m.values));
}
inline Sinogram read_sinogram_csv(std::istream& is) {
  auto m = detail::read_matrix_csv(is);
  return Sinogram(m.rows, m.cols, std::move(m.values));
}

template <class T>
void save_csv(const std::filesystem::path& p, const T& matrix) {
  auto os = detail::open_out(p);
  write_csv(os, matrix);
  if (!os) throw std::runtime_error("write to '" + p.string() + "' failed");
}

inline Image load_image_csv(const std::filesystem::path& p) {
  auto is = detail::open_in(p);
  return read_image_csv(is);
}
inline Sinogram load_sinogram_csv(const std::filesystem::path& p) {
  auto is = detail::open_in(p);
  return read_sinogram_csv(is);
}

/// ASCII PGM (P2), min..max mapped linearly onto 0..65535.
inline void write_pgm(std::ostream& os, const Image& img) {
  auto v = img.values();
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  os << "P2\n" << img.width() << ' ' << img.height() << "\n65535\n";
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      double x = span > 0 ? (img(r, c) - *lo) / span : 0.0;
      os << static_cast<long>(std::lround(x * 65535.0)) << (c + 1 == img.width() ? '\n' : ' ');
    }
  }
}

}  // namespace roiqubo
