#pragma once
// Polarized complex field transfer along a solved path: complex permittivity,
// Fresnel reflection coefficients, transverse polarization bookkeeping,
// antenna field patterns, and spherical spreading. The per-path delay phase
// is applied by the channel layer, not here.

#include <array>
#include <utility>

#include "rfray/cplx.hpp"
#include "rfray/scene.hpp"
#include "rfray/tracer.hpp"

namespace rfray {

// eta = eps_r - j sigma / (2 pi f eps0); lossless materials are purely real.
template <class T>
inline Cx<T> complex_permittivity(const T& eps_r, const T& sigma, double f) {
  if (f <= 0.0) throw NumericError("complex_permittivity requires f > 0");
  return {eps_r, -sigma / (T(2.0 * kPi * kVacuumPermittivity) * T(f))};
}

// Reflection coefficients for the perpendicular (s) and parallel (p)
// components. Branch: principal square root, Re >= 0, the decaying wave.
template <class T>
inline std::pair<Cx<T>, Cx<T>> fresnel(const T& cos_theta, const Cx<T>& eta) {
  const double cv = value_of(cos_theta);
  if (cv < -1e-12 || cv > 1.0 + 1e-12)
    throw NumericError("fresnel incidence cosine outside [0, 1]");
  const T sin2 = T(1) - cos_theta * cos_theta;
  const Cx<T> root = sqrt(eta - Cx<T>{sin2, T(0)});
  const Cx<T> c{cos_theta, T(0)};
  const Cx<T> r_perp = (c - root) / (c + root);
  const Cx<T> r_par = (eta * c - root) / (eta * c + root);
  return {r_perp, r_par};
}

// Orthonormal spherical basis (e_theta, e_phi) transverse to a unit
// direction; deterministic pole fallback matching the phi = 0 limit.
template <class T>
inline std::pair<Vec3<T>, Vec3<T>> spherical_basis(const Vec3<T>& d) {
  using std::sqrt;
  const T h2 = d.x * d.x + d.y * d.y;
  Vec3<T> e_phi;
  if (value_of(h2) < 1e-18) {
    e_phi = Vec3<T>{T(0), T(1), T(0)};
  } else {
    const T inv = T(1) / sqrt(h2);
    e_phi = Vec3<T>{-d.y * inv, d.x * inv, T(0)};
  }
  return {cross(e_phi, d), e_phi};
}

// Antenna field pattern components on the spherical basis at `dir`.
template <class T>
inline std::array<T, 2> pattern_field(Pattern p, const Vec3<T>& dir) {
  if (p == Pattern::IsotropicVertical) return {T(1), T(0)};
  using std::sqrt;
  const T h2 = dir.x * dir.x + dir.y * dir.y;
  return {sqrt(h2), T(0)};  // short dipole along z: sin(theta) on e_theta
}

// Perpendicular polarization axis at a bounce; falls back to the global
// horizontal axis projected transverse to d_in at normal incidence.
template <class T>
inline Vec3<T> perp_axis(const Vec3<T>& d_in, const Vec3<T>& n) {
  const Vec3<T> c = cross(d_in, n);
  const T c2 = norm2(c);
  if (value_of(c2) >= 1e-18) {
    using std::sqrt;
    return c / sqrt(c2);
  }
  Vec3<T> e = Vec3<T>{T(1), T(0), T(0)} - dot(Vec3<T>{T(1), T(0), T(0)}, d_in) * d_in;
  if (value_of(norm2(e)) < 1e-18)
    e = Vec3<T>{T(0), T(1), T(0)} - dot(Vec3<T>{T(0), T(1), T(0)}, d_in) * d_in;
  return normalized(e);
}

// 2x2 change of transverse basis from (e_s, e_p) into the bounce frame
// (e_perp, e_par) with e_par = e_perp x d_in. Orthogonal by construction
// when (e_s, e_p) are orthonormal and transverse to d_in.
template <class T>
inline std::array<T, 4> basis_rotation(const Vec3<T>& d_in, const Vec3<T>& n,
                                       const Vec3<T>& e_s, const Vec3<T>& e_p) {
  const Vec3<T> perp = perp_axis(d_in, n);
  const Vec3<T> par = cross(perp, d_in);
  return {dot(perp, e_s), dot(perp, e_p), dot(par, e_s), dot(par, e_p)};
}

// Arrival-basis complex field 2-vector for one path at one frequency:
// TX pattern launch, per-bounce rotation + Fresnel, final rotation into the
// RX arrival spherical basis, spreading amplitude lambda/(4 pi L), and the
// soft-visibility weight. Phase is excluded by contract.
template <class T>
inline std::array<Cx<T>, 2> path_field(const SolvedPath<T>& sp, Pattern tx_pattern,
                                       const std::vector<T>& eps_r,
                                       const std::vector<T>& sigma, double f) {
  const auto g = pattern_field(tx_pattern, sp.seg_dirs.front());
  auto [e_s, e_p] = spherical_basis(sp.seg_dirs.front());
  Cx<T> a{g[0], T(0)};
  Cx<T> b{g[1], T(0)};
  for (std::size_t k = 0; k < sp.materials.size(); ++k) {
    const Vec3<T>& d_in = sp.seg_dirs[k];
    const Vec3<T> perp = perp_axis(d_in, sp.hop_normals[k]);
    const Vec3<T> par = cross(perp, d_in);
    const Cx<T> es = dot(perp, e_s) * a + dot(perp, e_p) * b;
    const Cx<T> ep = dot(par, e_s) * a + dot(par, e_p) * b;
    const int m = sp.materials[k];
    const Cx<T> eta = complex_permittivity(eps_r[std::size_t(m)], sigma[std::size_t(m)], f);
    const auto [r_perp, r_par] = fresnel(sp.cos_inc[k], eta);
    a = r_perp * es;
    b = r_par * ep;
    e_s = perp;
    e_p = cross(perp, sp.seg_dirs[k + 1]);
  }
  const auto [r_th, r_ph] = spherical_basis(-sp.seg_dirs.back());
  const T amp = T(kSpeedOfLight / f) / (T(4.0 * kPi) * sp.length) * sp.v;
  return {amp * (dot(r_th, e_s) * a + dot(r_th, e_p) * b),
          amp * (dot(r_ph, e_s) * a + dot(r_ph, e_p) * b)};
}

// Rebuilds the templated view from a reported record (normals from the
// bisector of the turn at each interior point) and evaluates the transfer.
inline std::array<Cd, 2> path_transfer(const PathRecord& r, const Scene& s, double f) {
  SolvedPath<double> sp;
  sp.key = r.key;
  sp.points = r.points;
  sp.materials = r.materials;
  sp.cos_inc = r.cos_inc;
  sp.v = r.v;
  sp.length = 0.0;
  for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
    const V3 seg = r.points[i + 1] - r.points[i];
    const double len = norm(seg);
    sp.length += len;
    sp.seg_dirs.push_back(seg / len);
  }
  sp.tau = sp.length / kSpeedOfLight;
  for (std::size_t k = 0; k + 1 < sp.seg_dirs.size(); ++k) {
    const V3 bis = sp.seg_dirs[k + 1] - sp.seg_dirs[k];  // parallel to the face normal
    const V3 n = normalized(bis);
    sp.hop_normals.push_back(dot(sp.seg_dirs[k], n) > 0.0 ? -n : n);
  }
  std::vector<double> eps, sig;
  for (const auto& m : s.materials) {
    eps.push_back(m.eps_r);
    sig.push_back(m.sigma);
  }
  return path_field(sp, s.tx.pattern, eps, sig, f);
}

}  // namespace rfray
