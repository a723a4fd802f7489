#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace roiqubo::detail {

// std distributions are implementation-defined; these mappings are not, so a
// seed reproduces the same stream with any standard library.

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform in [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return k < n ? k : n - 1;
}

/// Independent stream for (seed, stream) pairs.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace roiqubo::detail
