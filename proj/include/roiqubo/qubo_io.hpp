#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "roiqubo/error.hpp"
#include "roiqubo/io.hpp"
#include "roiqubo/qubo.hpp"

namespace roiqubo {

// Interchange format (.qubo.txt):
//   n m c
//   u v value      (m lines, u <= v, sorted by (u, v))
// Numbers use the shortest decimal form that round-trips exactly.

inline void export_qubo(std::ostream& os, const QuboProblem& p) {
  os << p.n() << ' ' << p.terms().size() << ' ' << format_double(p.constant()) << '\n';
  for (const auto& t : p.terms()) os << t.u << ' ' << t.v << ' ' << format_double(t.value) << '\n';
}

namespace detail {
inline std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}
}  // namespace detail

/// Parses the interchange format. The result carries no variable map.
inline QuboProblem import_qubo(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next()) throw parse_error("missing header line 'n m c'", 1);
  auto head = detail::fields(line);
  if (head.size() != 3) throw parse_error("header must be 'n m c'", lineno);
  const std::size_t n = parse_count(head[0], lineno);
  const std::size_t m = parse_count(head[1], lineno);
  const double c = parse_double(head[2], lineno);
  if (n > UINT32_MAX) throw parse_error("variable count too large", lineno);

  std::vector<QuboTerm> terms;
  terms.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!next())
      throw parse_error("expected " + std::to_string(m) + " coefficient lines, found " +
                            std::to_string(k),
                        lineno + 1);
    auto f = detail::fields(line);
    if (f.size() != 3) throw parse_error("coefficient line must be 'u v value'", lineno);
    const std::size_t u = parse_count(f[0], lineno), v = parse_count(f[1], lineno);
    const double value = parse_double(f[2], lineno);
    if (u > v) throw parse_error("u > v in coefficient line", lineno);
    if (v >= n) throw parse_error("index " + std::to_string(v) + " >= n", lineno);
    if (!terms.empty() && (terms.back().u > u || (terms.back().u == u && terms.back().v >= v)))
      throw parse_error("coefficient lines must be strictly sorted by (u, v)", lineno);
    terms.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), value});
  }
  if (next()) throw parse_error("trailing content after " + std::to_string(m) + " coefficients", lineno);
  return QuboProblem(n, std::move(terms), c);
}

inline void save_qubo(const std::filesystem::path& p, const QuboProblem& problem) {
  auto os = detail::open_out(p);
  export_qubo(os, problem);
}

inline QuboProblem load_qubo(const std::filesystem::path& p) {
  auto is = detail::open_in(p);
  return import_qubo(is);
}

/// "var_id,row,col,level" lines, one per variable in id order (level 0-based).
inline void write_varmap_csv(std::ostream& os, const VariableMap& map) {
  for (std::size_t id = 0; id < map.size(); ++id) {
    const auto& k = map.key(id);
    os << id << ',' << k.row << ',' << k.col << ',' << k.level << '\n';
  }
}

inline VariableMap read_varmap_csv(std::istream& is) {
  std::vector<VarKey> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != 4) throw parse_error("varmap line must be 'var_id,row,col,level'", lineno);
    if (parse_count(f[0], lineno) != keys.size())
      throw parse_error("variable ids must be consecutive from 0", lineno);
    keys.push_back({parse_count(f[1], lineno), parse_count(f[2], lineno), parse_count(f[3], lineno)});
  }
  return VariableMap(std::move(keys));
}

}  // namespace roiqubo
