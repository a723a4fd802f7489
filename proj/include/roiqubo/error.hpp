#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roiqubo {

// Bad dimensions, out-of-range ROI, malformed parameters.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A problem exceeds the hard size limit of the requested solver.
class capacity_error : public std::runtime_error {
 public:
  capacity_error(const std::string& what, std::size_t cap)
      : std::runtime_error(what), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

// Malformed text input. line() is 1-based; 0 means "not line specific".
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw invalid_argument(msg);
}
}  // namespace detail

}  // namespace roiqubo
