#pragma once
// Deterministic unit-sphere direction sequence for ray launching.
// Nested by construction: the first N points of launch_directions(2N, ...)
// are exactly launch_directions(N, ...), so path discovery is monotone in the
// ray budget. Azimuth follows the golden angle, z = cos(theta) follows the
// base-2 van der Corput sequence; both are low-discrepancy, and neither
// depends on the total count. The seed only rotates the whole set.

#include <cstdint>
#include <vector>

#include "rfray/core.hpp"
#include "rfray/rng.hpp"

namespace rfray {

// Bit-reversal radical inverse in base 2 of k+1 (k = 0 maps to 0.5).
inline double van_der_corput(std::uint64_t k) {
  std::uint64_t n = k + 1;
  double inv = 0.0, base = 0.5;
  while (n) {
    if (n & 1ULL) inv += base;
    n >>= 1ULL;
    base *= 0.5;
  }
  return inv;
}

inline V3 sphere_point(std::uint64_t k) {
  constexpr double kGolden = 0.6180339887498948482;  // frac(golden ratio)
  const double frac = std::fmod(double(k) * kGolden, 1.0);
  const double az = 2.0 * kPi * frac;
  const double z = 2.0 * van_der_corput(k) - 1.0;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(az), r * std::sin(az), z};
}

inline std::vector<V3> launch_directions(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Mat3 rot = random_rotation(rng);
  std::vector<V3> dirs;
  dirs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) dirs.push_back(rot.apply(sphere_point(k)));
  return dirs;
}

}  // namespace rfray
