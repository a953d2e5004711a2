#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace zenohl {
namespace rng {

// splitmix64 step, used both as a seed mixer and to derive independent
// sub-streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives a sub-seed from a master seed and a tuple of stream tags. Every
// independent sampling task gets its own tag tuple, so results do not depend
// on the order tasks are executed in.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(master ^ 0xA076'1D64'78BD'642FULL);
  for (std::uint64_t t : tags) s = splitmix64(s ^ t);
  return s;
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Uniform double in [0, 1) from raw engine output. The mt19937_64 output
// sequence is fixed by the standard, so this is reproducible across
// implementations (unlike std::uniform_real_distribution).
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double in [-1, 1).
inline double uniform_pm1(std::mt19937_64& g) { return 2.0 * uniform01(g) - 1.0; }

}  // namespace rng
}  // namespace zenohl
