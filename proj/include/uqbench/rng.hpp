#pragma once

#include <cstdint>
#include <string>

#include "uqbench/core.hpp"

namespace uqbench {

// Counter-based RNG. Every draw is a pure function of (seed, key), so results
// do not depend on evaluation order or thread scheduling.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                     std::uint64_t d = 0) const {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    h = mix64(h ^ d);
    return h;
  }

  // Uniform strictly inside (0, 1).
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                 std::uint64_t d = 0) const {
    return (static_cast<double>(bits(a, b, c, d) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via inverse CDF.
  double normal(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                std::uint64_t d = 0) const {
    return std_normal_quantile(uniform(a, b, c, d));
  }
};

// FNV-1a, used to key per-record draws off the record id.
inline std::uint64_t hash_id(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace uqbench
