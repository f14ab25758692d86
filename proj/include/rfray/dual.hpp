#pragma once
// Forward-mode dual numbers with a fixed number of derivative slots.
// The whole physics pipeline is templated on the scalar type; instantiating it
// with Dual<N> yields the value and N directional derivatives in one pass.
// Comparisons act on the value part so branchy numeric code (min, clamps,
// early exits) works unchanged; derivatives follow the branch taken.

#include <array>
#include <cmath>

#include "rfray/core.hpp"

namespace rfray {

template <int N>
struct Dual {
  double v{};
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit by design
  static Dual seeded(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& b) {
    v += b.v;
    for (int i = 0; i < N; ++i) d[i] += b.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& b) {
    v -= b.v;
    for (int i = 0; i < N; ++i) d[i] -= b.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& b) { return *this = *this * b; }
  Dual& operator/=(const Dual& b) { return *this = *this / b; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.v + b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r(a.v - b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a) {
    Dual r(-a.v);
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    Dual r(a.v * inv);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
};

template <int N>
inline double value_of(const Dual<N>& x) { return x.v; }

template <int N>
inline Dual<N> chain(double fv, double dfv, const Dual<N>& x) {
  Dual<N> r(fv);
  for (int i = 0; i < N; ++i) r.d[i] = dfv * x.d[i];
  return r;
}

template <int N> inline Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return chain(s, 0.5 / s, x);
}
template <int N> inline Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return chain(e, e, x);
}
template <int N> inline Dual<N> log(const Dual<N>& x) {
  return chain(std::log(x.v), 1.0 / x.v, x);
}
template <int N> inline Dual<N> sin(const Dual<N>& x) {
  return chain(std::sin(x.v), std::cos(x.v), x);
}
template <int N> inline Dual<N> cos(const Dual<N>& x) {
  return chain(std::cos(x.v), -std::sin(x.v), x);
}
template <int N> inline Dual<N> abs(const Dual<N>& x) {
  // Exact zero takes the symmetric subgradient: a perfectly matched residual
  // must report a zero slope so fixed points stay fixed under descent.
  if (x.v == 0.0) return Dual<N>(0.0);
  return x.v < 0.0 ? -x : x;
}
template <int N> inline Dual<N> atan2(const Dual<N>& y, const Dual<N>& x) {
  const double den = x.v * x.v + y.v * y.v;
  Dual<N> r(std::atan2(y.v, x.v));
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / den;
  return r;
}
template <int N> inline Dual<N> min(const Dual<N>& a, const Dual<N>& b) { return b < a ? b : a; }
template <int N> inline Dual<N> max(const Dual<N>& a, const Dual<N>& b) { return a < b ? b : a; }
template <int N> inline bool isfinite(const Dual<N>& x) { return std::isfinite(x.v); }

using Dual2 = Dual<2>;
using Dual8 = Dual<8>;

}  // namespace rfray
