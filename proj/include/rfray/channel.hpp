#pragma once
// CSI assembly and measurement features: per-pair synthesis over solved
// paths, adjacent-antenna CSI ratios with a floor guard, Savitzky-Golay
// smoothing along subcarriers, the power-delay profile, and the phase-slope
// mean-delay feature. Everything that feeds a loss is templated so dual
// scalars flow through; the frequency-independent polarization geometry of
// each path is hoisted out of the subcarrier loop.

#include <cstdint>
#include <vector>

#include "rfray/em.hpp"
#include "rfray/tracer.hpp"

namespace rfray {

template <class T>
struct CsiTensor {
  int nt = 0, nr = 0, ns = 0;
  FreqGrid freq;
  std::vector<Cx<T>> data;  // row-major [nt][nr][j]
  int path_count = 0;       // solved paths summed over antenna pairs
  int pruned_count = 0;     // keys dropped by realization across pairs

  Cx<T>& at(int t, int r, int j) { return data[std::size_t((t * nr + r) * ns + j)]; }
  const Cx<T>& at(int t, int r, int j) const {
    return data[std::size_t((t * nr + r) * ns + j)];
  }
};

using Csi = CsiTensor<double>;

template <class T>
struct RatioTensor {
  int npair = 0, nr = 0, ns = 0;  // npair = nt - 1
  std::vector<Cx<T>> data;
  bool floored = false;  // some denominator was below the magnitude floor

  Cx<T>& at(int p, int r, int j) { return data[std::size_t((p * nr + r) * ns + j)]; }
  const Cx<T>& at(int p, int r, int j) const {
    return data[std::size_t((p * nr + r) * ns + j)];
  }
};

template <class T>
struct DelayFeatures {
  int nt = 0, nr = 0;
  std::vector<T> tau;       // seconds, row-major [nt][nr]
  std::vector<char> flag;   // 1 = undefined (zero-power channel)

  const T& at(int t, int r) const { return tau[std::size_t(t * nr + r)]; }
  bool flagged(int t, int r) const { return flag[std::size_t(t * nr + r)] != 0; }
};

// Frequency-independent per-path data: polarization rotations, pattern
// components, incidence cosines, and the geometry amplitude v/(4 pi L).
template <class T>
struct PathChain {
  std::vector<std::array<T, 4>> rot;  // per hop, row-major 2x2
  std::array<T, 4> rot_rx{};          // into the arrival spherical basis
  std::array<T, 2> c_tx{}, c_rx{};    // pattern fields at AoD / AoA
  std::vector<T> cos_inc;
  std::vector<int> materials;
  T geo_amp{};  // v / (4 pi L); multiply by lambda_j per subcarrier
  T tau{};
};

template <class T>
inline PathChain<T> build_chain(const SolvedPath<T>& sp, Pattern tx_pattern,
                                Pattern rx_pattern) {
  PathChain<T> ch;
  ch.cos_inc = sp.cos_inc;
  ch.materials = sp.materials;
  ch.tau = sp.tau;
  ch.geo_amp = sp.v / (T(4.0 * kPi) * sp.length);
  ch.c_tx = pattern_field(tx_pattern, sp.seg_dirs.front());
  auto [e_s, e_p] = spherical_basis(sp.seg_dirs.front());
  for (std::size_t k = 0; k < sp.materials.size(); ++k) {
    const Vec3<T>& d_in = sp.seg_dirs[k];
    const Vec3<T> perp = perp_axis(d_in, sp.hop_normals[k]);
    const Vec3<T> par = cross(perp, d_in);
    ch.rot.push_back({dot(perp, e_s), dot(perp, e_p), dot(par, e_s), dot(par, e_p)});
    e_s = perp;
    e_p = cross(perp, sp.seg_dirs[k + 1]);
  }
  const Vec3<T> u_arr = -sp.seg_dirs.back();
  const auto [r_th, r_ph] = spherical_basis(u_arr);
  ch.rot_rx = {dot(r_th, e_s), dot(r_th, e_p), dot(r_ph, e_s), dot(r_ph, e_p)};
  ch.c_rx = pattern_field(rx_pattern, u_arr);
  return ch;
}

// Scalar coefficient (no delay phase) of one chain at one frequency.
template <class T>
inline Cx<T> eval_chain(const PathChain<T>& ch, const std::vector<T>& eps_r,
                        const std::vector<T>& sigma, double f) {
  Cx<T> a{ch.c_tx[0], T(0)};
  Cx<T> b{ch.c_tx[1], T(0)};
  for (std::size_t k = 0; k < ch.materials.size(); ++k) {
    const auto& m = ch.rot[k];
    const Cx<T> es = m[0] * a + m[1] * b;
    const Cx<T> ep = m[2] * a + m[3] * b;
    const int mi = ch.materials[k];
    const Cx<T> eta =
        complex_permittivity(eps_r[std::size_t(mi)], sigma[std::size_t(mi)], f);
    const auto [r_perp, r_par] = fresnel(ch.cos_inc[k], eta);
    a = r_perp * es;
    b = r_par * ep;
  }
  const Cx<T> eth = ch.rot_rx[0] * a + ch.rot_rx[1] * b;
  const Cx<T> eph = ch.rot_rx[2] * a + ch.rot_rx[3] * b;
  const T amp = T(kSpeedOfLight / f) * ch.geo_amp;
  return amp * (ch.c_rx[0] * eth + ch.c_rx[1] * eph);
}

// CSI for one antenna pair from already-solved paths.
template <class T>
inline void accumulate_pair_csi(CsiTensor<T>& H, int t, int r,
                                const std::vector<SolvedPath<T>>& paths, Pattern tx_pattern,
                                Pattern rx_pattern, const std::vector<T>& eps_r,
                                const std::vector<T>& sigma) {
  for (const auto& sp : paths) {
    const PathChain<T> ch = build_chain(sp, tx_pattern, rx_pattern);
    for (int j = 0; j < H.ns; ++j) {
      const double fj = H.freq.f(j);
      const Cx<T> g = eval_chain(ch, eps_r, sigma, fj);
      const T phase = T(-2.0 * kPi * fj) * ch.tau;
      H.at(t, r, j) += g * expi(phase);
    }
  }
}

// Full tensor under possibly-perturbed parameters. Discovery runs on the
// primal (double) geometry; realization and transfer run in T.
template <class T>
inline CsiTensor<T> synthesize_csi_with(const Scene& scene, const SceneParams<T>& params) {
  CsiTensor<T> H;
  H.nt = scene.tx.array.count;
  H.nr = scene.rx.array.count;
  H.ns = scene.freq.ns;
  H.freq = scene.freq;
  H.data.assign(std::size_t(H.nt * H.nr * H.ns), Cx<T>{});

  const Scene primal = scene_at(scene, params);
  const auto world = build_world(primal);
  const SceneParams<double> pv = SceneParams<double>::from_scene(primal);
  for (int t = 0; t < H.nt; ++t) {
    const V3 tx = pv.tx_element(primal, t);
    const auto keys = discover_keys(world, tx, scene.sim);
    for (int r = 0; r < H.nr; ++r) {
      int dropped = 0;
      const auto paths = replay_keys(scene, params, keys, t, r, &dropped);
      H.path_count += int(paths.size());
      H.pruned_count += dropped;
      accumulate_pair_csi(H, t, r, paths, scene.tx.pattern, scene.rx.pattern,
                          params.eps_r, params.sigma);
    }
  }
  return H;
}

inline Csi synthesize_csi(const Scene& scene) {
  return synthesize_csi_with(scene, SceneParams<double>::from_scene(scene));
}

inline constexpr double kRatioFloor = 1e-12;

// Adjacent-TX-antenna ratio; common per-subcarrier phase offsets cancel.
template <class T>
inline RatioTensor<T> csi_ratio(const CsiTensor<T>& H) {
  if (H.nt < 2) throw UsageError("csi_ratio requires at least two TX antennas");
  RatioTensor<T> R;
  R.npair = H.nt - 1;
  R.nr = H.nr;
  R.ns = H.ns;
  R.data.assign(std::size_t(R.npair * R.nr * R.ns), Cx<T>{});
  for (int p = 0; p < R.npair; ++p)
    for (int r = 0; r < R.nr; ++r)
      for (int j = 0; j < R.ns; ++j) {
        Cx<T> den = H.at(p, r, j);
        const double mag = value_of(abs(den));
        if (mag < kRatioFloor) {
          R.floored = true;
          if (mag == 0.0)
            den = Cx<T>{T(kRatioFloor), T(0)};
          else
            den = T(kRatioFloor / mag) * den;
        }
        R.at(p, r, j) = H.at(p + 1, r, j) / den;
      }
  return R;
}

namespace detail {

// Weights of the least-squares polynomial fit evaluated at the center index:
// out[i] = sum_k w[k] * in[lo + k] for the (possibly truncated) window.
inline std::vector<double> savgol_weights(int lo, int hi, int center, int polyorder) {
  const int m = hi - lo + 1;
  const int p = polyorder + 1;
  // Normal equations G c = A^T y with A[r][c] = x_r^c, x_r = lo + r - center.
  std::vector<double> a(std::size_t(m * p));
  for (int r = 0; r < m; ++r) {
    double v = 1.0;
    const double x = double(lo + r - center);
    for (int c = 0; c < p; ++c) {
      a[std::size_t(r * p + c)] = v;
      v *= x;
    }
  }
  std::vector<double> g(std::size_t(p * p), 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int r = 0; r < m; ++r)
        s += a[std::size_t(r * p + i)] * a[std::size_t(r * p + j)];
      g[std::size_t(i * p + j)] = s;
    }
  // Solve G z = e0 by Gaussian elimination with partial pivoting.
  std::vector<double> z(std::size_t(p), 0.0);
  z[0] = 1.0;
  for (int col = 0; col < p; ++col) {
    int piv = col;
    for (int r = col + 1; r < p; ++r)
      if (std::abs(g[std::size_t(r * p + col)]) > std::abs(g[std::size_t(piv * p + col)]))
        piv = r;
    if (piv != col) {
      for (int c = 0; c < p; ++c)
        std::swap(g[std::size_t(col * p + c)], g[std::size_t(piv * p + c)]);
      std::swap(z[std::size_t(col)], z[std::size_t(piv)]);
    }
    const double d = g[std::size_t(col * p + col)];
    for (int r = col + 1; r < p; ++r) {
      const double f = g[std::size_t(r * p + col)] / d;
      for (int c = col; c < p; ++c)
        g[std::size_t(r * p + c)] -= f * g[std::size_t(col * p + c)];
      z[std::size_t(r)] -= f * z[std::size_t(col)];
    }
  }
  for (int r = p - 1; r >= 0; --r) {
    double s = z[std::size_t(r)];
    for (int c = r + 1; c < p; ++c) s -= g[std::size_t(r * p + c)] * z[std::size_t(c)];
    z[std::size_t(r)] = s / g[std::size_t(r * p + r)];
  }
  // w[k] = sum_c z[c] * x_k^c  (G is symmetric, so z doubles as e0^T G^{-1}).
  std::vector<double> w(std::size_t(m), 0.0);
  for (int r = 0; r < m; ++r) {
    double s = 0.0;
    for (int c = 0; c < p; ++c) s += z[std::size_t(c)] * a[std::size_t(r * p + c)];
    w[std::size_t(r)] = s;
  }
  return w;
}

}  // namespace detail

// Savitzky-Golay smoothing along the subcarrier axis, real and imaginary
// parts independently; edges fit the same-order polynomial on truncated
// windows. Linear in the data, so dual values pass straight through.
template <class T>
inline RatioTensor<T> savgol(const RatioTensor<T>& in, int window = 11, int polyorder = 3) {
  if (window % 2 == 0 || window <= polyorder || window > in.ns)
    throw UsageError("savgol requires odd window, window > polyorder, window <= ns");
  RatioTensor<T> out = in;
  const int half = window / 2;
  std::vector<std::vector<double>> weights(std::size_t(in.ns));
  for (int j = 0; j < in.ns; ++j) {
    const int lo = std::max(0, j - half);
    const int hi = std::min(in.ns - 1, j + half);
    weights[std::size_t(j)] = detail::savgol_weights(lo, hi, j, polyorder);
  }
  for (int p = 0; p < in.npair; ++p)
    for (int r = 0; r < in.nr; ++r)
      for (int j = 0; j < in.ns; ++j) {
        const int lo = std::max(0, j - half);
        const auto& w = weights[std::size_t(j)];
        Cx<T> acc{};
        for (std::size_t k = 0; k < w.size(); ++k)
          acc += T(w[k]) * in.at(p, r, lo + int(k));
        out.at(p, r, j) = acc;
      }
  return out;
}

// Inverse DFT across subcarriers: x_b = (1/N) sum_j h_j e^{+2 pi i j b / N};
// powers are |x_b|^2 and delays b / (N_s df). Satisfies
// sum_j |h_j|^2 = N_s * sum_b P_b.
inline std::pair<std::vector<double>, std::vector<double>> power_delay_profile(
    const Csi& H, int t, int r) {
  const int n = H.ns;
  std::vector<double> delays(std::size_t(n), 0.0), powers(std::size_t(n), 0.0);
  for (int b = 0; b < n; ++b) {
    Cd acc{};
    for (int j = 0; j < n; ++j) {
      const double ph = 2.0 * kPi * double(j) * double(b) / double(n);
      acc += H.at(t, r, j) * expi(ph);
    }
    acc = (1.0 / double(n)) * acc;
    delays[std::size_t(b)] = double(b) / (double(n) * H.freq.df);
    powers[std::size_t(b)] = abs2(acc);
  }
  return {delays, powers};
}

// Power-weighted mean delay from the lag-1 subcarrier autocorrelation:
// tau = -arg(sum_j conj(h_j) h_{j+1}) / (2 pi df), wrapped into [0, 1/df).
// Exact for a single path; equal-power pairs average exactly.
template <class T>
inline DelayFeatures<T> delay_feature(const CsiTensor<T>& H) {
  DelayFeatures<T> out;
  out.nt = H.nt;
  out.nr = H.nr;
  out.tau.assign(std::size_t(H.nt * H.nr), T(0));
  out.flag.assign(std::size_t(H.nt * H.nr), 0);
  for (int t = 0; t < H.nt; ++t)
    for (int r = 0; r < H.nr; ++r) {
      Cx<T> acc{};
      for (int j = 0; j + 1 < H.ns; ++j) acc += conj(H.at(t, r, j)) * H.at(t, r, j + 1);
      const std::size_t idx = std::size_t(t * H.nr + r);
      if (value_of(abs2(acc)) == 0.0) {
        out.flag[idx] = 1;
        continue;
      }
      T tau = -arg(acc) / T(2.0 * kPi * H.freq.df);
      if (value_of(tau) < 0.0) tau += T(1.0 / H.freq.df);
      out.tau[idx] = tau;
    }
  return out;
}

}  // namespace rfray
