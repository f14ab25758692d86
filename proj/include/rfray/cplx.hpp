#pragma once
// Complex arithmetic over a generic real scalar. std::complex is only
// specified for the builtin floating types, so dual-number work needs its own
// minimal complex type. The square root uses the principal branch (Re >= 0),
// which is the physically decaying branch for lossy-medium Fresnel terms.

#include <cmath>

#include "rfray/core.hpp"

namespace rfray {

template <class T>
struct Cx {
  T re{}, im{};

  constexpr Cx() = default;
  constexpr Cx(T r) : re(r) {}  // NOLINT: implicit by design
  constexpr Cx(T r, T i) : re(r), im(i) {}

  friend Cx operator+(const Cx& a, const Cx& b) { return {a.re + b.re, a.im + b.im}; }
  friend Cx operator-(const Cx& a, const Cx& b) { return {a.re - b.re, a.im - b.im}; }
  friend Cx operator-(const Cx& a) { return {-a.re, -a.im}; }
  friend Cx operator*(const Cx& a, const Cx& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Cx operator*(const T& s, const Cx& a) { return {s * a.re, s * a.im}; }
  friend Cx operator*(const Cx& a, const T& s) { return s * a; }
  friend Cx operator/(const Cx& a, const Cx& b) {
    const T den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  Cx& operator+=(const Cx& b) { re += b.re; im += b.im; return *this; }
  Cx& operator-=(const Cx& b) { re -= b.re; im -= b.im; return *this; }
  Cx& operator*=(const Cx& b) { return *this = *this * b; }
};

template <class T>
inline Cx<T> conj(const Cx<T>& a) { return {a.re, -a.im}; }

template <class T>
inline T abs2(const Cx<T>& a) { return a.re * a.re + a.im * a.im; }

template <class T>
inline T abs(const Cx<T>& a) {
  using std::sqrt;
  return sqrt(abs2(a));
}

template <class T>
inline T arg(const Cx<T>& a) {
  using std::atan2;
  return atan2(a.im, a.re);
}

// Principal square root: Re(result) >= 0; Im(result) carries the sign of Im(a)
// (non-negative for Im(a) == 0, matching the standard branch cut).
template <class T>
inline Cx<T> sqrt(const Cx<T>& a) {
  using std::sqrt;
  if (value_of(a.im) == 0.0) {
    // Exactly-real radicand: the half-angle split below is quadratically
    // degenerate on this axis and would drop the first-order response of the
    // vanishing component, so linearize it against the dominant arm instead
    // (principal side of the cut on the negative axis).
    if (value_of(a.re) > 0.0) {
      const T u = sqrt(a.re);
      return {u, a.im / (u + u)};
    }
    if (value_of(a.re) < 0.0) {
      const T w = sqrt(T(0) - a.re);
      return {a.im / (w + w), w};
    }
    // Zero stays exactly zero with a zero derivative: sqrt's infinite slope
    // at 0 would otherwise poison dual slots with inf * 0.
    return {T(0), T(0)};
  }
  const T r = abs(a);
  const T half(0.5);
  const T p = half * (r + a.re);
  const T q = half * (r - a.re);
  // Arms that round below zero are clamped the same way as the origin case.
  const T u = value_of(p) > 0.0 ? sqrt(p) : T(0);
  T w = value_of(q) > 0.0 ? sqrt(q) : T(0);
  if (a.im < T(0)) w = -w;
  return {u, w};
}

// e^{i*phase}
template <class T>
inline Cx<T> expi(const T& phase) {
  using std::cos;
  using std::sin;
  return {cos(phase), sin(phase)};
}

using Cd = Cx<double>;

}  // namespace rfray
