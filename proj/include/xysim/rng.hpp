#pragma once

#include <cmath>
#include <cstdint>

namespace xysim {

// Counter-based RNG built on splitmix64. Every draw is a pure function of
// (seed, stream indices), so results do not depend on how work is sharded
// across threads.
inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)) ^ splitmix64(b));
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c) {
  return hash_mix(hash_mix(a, b), c);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return hash_mix(hash_mix(a, b, c), d);
}

// Uniform in [0, 1) with 53 bits of mantissa.
inline double u01(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Uniform in (0, 1]; safe as a log() argument.
inline double u01_open(uint64_t h) { return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53; }

// Standard exponential deviate.
inline double exp_deviate(uint64_t h) { return -std::log(u01_open(h)); }

// Standard normal pair via Box-Muller.
inline void normal_pair(uint64_t h1, uint64_t h2, double& n1, double& n2) {
  const double r = std::sqrt(-2.0 * std::log(u01_open(h1)));
  const double phi = 6.283185307179586476925286766559 * u01(h2);
  n1 = r * std::cos(phi);
  n2 = r * std::sin(phi);
}

}  // namespace xysim
