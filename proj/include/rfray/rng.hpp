#pragma once
// Deterministic random primitives. Hand-rolled splitmix64 and Box-Muller so
// that every stream is reproducible bit-for-bit across platforms and library
// versions (std::normal_distribution makes no such guarantee). Streams are
// cheap value types: fork() derives independent substreams, which is how
// per-record / per-sample work stays identical under any thread count.

#include <cstdint>

#include "rfray/core.hpp"

namespace rfray {

struct SplitMix64 {
  std::uint64_t state{};

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Independent substream: mixes the key through one splitmix step so forked
  // streams do not overlap the parent sequence.
  SplitMix64 fork(std::uint64_t key) const {
    SplitMix64 child(state ^ (0x9e3779b97f4a7c15ULL * (key + 0x632be59bd9b4e019ULL)));
    child.next_u64();
    return child;
  }
};

// Standard normal via Box-Muller (both values consumed in order).
struct GaussStream {
  SplitMix64 rng;
  bool have_spare = false;
  double spare = 0.0;

  explicit GaussStream(SplitMix64 r) : rng(r) {}

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    // u1 in (0,1] so log() is finite.
    double u1 = 1.0 - rng.next_double();
    double u2 = rng.next_double();
    double m = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare = m * std::sin(a);
    have_spare = true;
    return m * std::cos(a);
  }
};

struct Mat3 {
  // Row-major 3x3.
  double m[3][3];

  V3 apply(const V3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  static Mat3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }
};

// Uniform random rotation (Shoemake quaternion method) from three uniforms.
inline Mat3 random_rotation(SplitMix64& rng) {
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  const double u3 = rng.next_double();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double qx = a * std::sin(2.0 * kPi * u2);
  const double qy = a * std::cos(2.0 * kPi * u2);
  const double qz = b * std::sin(2.0 * kPi * u3);
  const double qw = b * std::cos(2.0 * kPi * u3);
  Mat3 r;
  r.m[0][0] = 1 - 2 * (qy * qy + qz * qz);
  r.m[0][1] = 2 * (qx * qy - qz * qw);
  r.m[0][2] = 2 * (qx * qz + qy * qw);
  r.m[1][0] = 2 * (qx * qy + qz * qw);
  r.m[1][1] = 1 - 2 * (qx * qx + qz * qz);
  r.m[1][2] = 2 * (qy * qz - qx * qw);
  r.m[2][0] = 2 * (qx * qz - qy * qw);
  r.m[2][1] = 2 * (qy * qz + qx * qw);
  r.m[2][2] = 1 - 2 * (qx * qx + qy * qy);
  return r;
}

}  // namespace rfray
