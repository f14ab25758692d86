#pragma once
// Shooting-and-bouncing-ray path discovery plus exact per-key realization.
//
// Discovery (double precision): launch the nested deterministic direction set
// from the TX element and bounce specularly up to max_depth; every distinct
// face-id prefix reached by any ray becomes a candidate key. The LoS key is
// always a candidate. Whether a candidate yields a path is decided entirely
// by the exact per-key solve below, so completeness for a face sequence needs
// only one ray to reach it anywhere on the faces, not near the specular
// point. Discovery is piecewise-constant in the scene parameters.
//
// Realization (templated): for each key, the exact specular geometry is
// re-solved by mirroring the TX element through the face planes in sequence,
// so the emitted geometry depends on the key alone (not on which launch ray
// found it), satisfies the specular reflection law to machine precision, and
// is smoothly differentiable through object/transceiver translations. The
// soft-visibility weight is a logistic of the worst margin: per-hop in-plane
// containment of the solved reflection points and per-segment occlusion
// clearance against every other face.

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "rfray/geom.hpp"
#include "rfray/params.hpp"
#include "rfray/scene.hpp"
#include "rfray/sphere.hpp"

namespace rfray {

inline constexpr double kGeomEps = 1e-6;      // m, self-intersection offset
inline constexpr double kPruneV = 1e-3;       // visibility prune threshold
inline constexpr double kPruneMarginWidths = -7.0;  // early-exit bound, sigmoid(-7) < 1e-3

using PathKey = std::vector<int>;  // global face ids, TX to RX order

// Geometric path realized along a frozen key.
template <class T>
struct SolvedPath {
  PathKey key;
  std::vector<Vec3<T>> points;      // [tx, Q_1..Q_K, rx]
  std::vector<Vec3<T>> seg_dirs;    // unit, points[i] -> points[i+1]
  std::vector<Vec3<T>> hop_normals; // oriented against the incoming segment
  std::vector<T> cos_inc;           // per hop |d_in . n|
  std::vector<int> materials;       // per hop material index
  T length{};                       // total polyline length, m
  T tau{};                          // length / c
  T margin{};                       // worst containment/occlusion margin
  T v{};                            // soft visibility in (0, 1]
};

// Spec-facing record for one propagation path (double precision, with angles).
struct PathRecord {
  PathKey key;
  std::vector<V3> points;
  std::vector<int> faces;
  std::vector<int> materials;
  std::vector<double> cos_inc;
  double tau = 0;
  double v = 1;
  double aod_theta = 0, aod_phi = 0;  // rad, TX frame
  double aoa_theta = 0, aoa_phi = 0;  // rad, RX frame
};

inline std::set<PathKey> discover_keys(const std::vector<WorldFace>& faces, const V3& tx,
                                       const SimConfig& sim) {
  std::set<PathKey> keys;
  keys.insert(PathKey{});  // LoS is always tested explicitly
  if (sim.max_depth == 0 || faces.empty()) return keys;
  const auto dirs = launch_directions(std::size_t(sim.n_rays), sim.seed);
  PathKey prefix;
  for (const V3& d0 : dirs) {
    V3 o = tx;
    V3 d = d0;
    int prev = -1;
    prefix.clear();
    for (int depth = 1; depth <= sim.max_depth; ++depth) {
      auto h = intersect(o, d, faces, kGeomEps, prev);
      if (!h) break;
      const V3 r = reflect_dir(d, faces[h->face].n);
      prefix.push_back(h->face);
      keys.insert(prefix);
      o = h->q + kGeomEps * r;
      d = r;
      prev = h->face;
    }
  }
  return keys;
}

template <class T>
inline std::vector<FaceT<T>> build_faces(const Scene& s, const SceneParams<T>& p) {
  std::vector<FaceT<T>> out;
  out.reserve(s.face_count());
  for (std::size_t oi = 0; oi < s.objects.size(); ++oi) {
    const SceneObject& o = s.objects[oi];
    const Vec3<T>& off = p.object_offset[oi];
    for (std::size_t fi = 0; fi < o.mesh.faces.size(); ++fi) {
      const auto& f = o.mesh.faces[fi];
      auto lift = [&](const V3& v) {
        return Vec3<T>{T(v.x) + off.x, T(v.y) + off.y, T(v.z) + off.z};
      };
      const V3& n = o.mesh.normals[fi];
      out.push_back({lift(o.mesh.vertices[f[0]]), lift(o.mesh.vertices[f[1]]),
                     lift(o.mesh.vertices[f[2]]),
                     Vec3<T>{T(n.x), T(n.y), T(n.z)}, o.material});
    }
  }
  return out;
}

// Exact specular solve plus margins and soft visibility. Returns nullopt for
// keys with no physical specular solution or with v below the prune
// threshold.
template <class T>
inline std::optional<SolvedPath<T>> realize_key(const PathKey& key,
                                                const std::vector<FaceT<T>>& faces,
                                                const Vec3<T>& tx, const Vec3<T>& rx,
                                                double soft_width) {
  const int K = int(key.size());
  SolvedPath<T> sp;
  sp.key = key;
  sp.points.assign(std::size_t(K) + 2, Vec3<T>{});
  sp.points[0] = tx;
  sp.points[std::size_t(K) + 1] = rx;

  if (K > 0) {
    // Mirror the TX element forward through the face planes.
    std::vector<Vec3<T>> img(std::size_t(K) + 1);
    img[0] = tx;
    for (int i = 1; i <= K; ++i) {
      const FaceT<T>& f = faces[std::size_t(key[std::size_t(i) - 1])];
      img[std::size_t(i)] = mirror_point(img[std::size_t(i) - 1], f.a, f.n);
    }
    // Walk back from the RX, intersecting each plane with the unfolded line.
    Vec3<T> cur = rx;
    for (int i = K; i >= 1; --i) {
      const FaceT<T>& f = faces[std::size_t(key[std::size_t(i) - 1])];
      const T den = dot(img[std::size_t(i)] - cur, f.n);
      if (std::abs(value_of(den)) < 1e-12) return std::nullopt;
      const T s = dot(f.a - cur, f.n) / den;
      const double sv = value_of(s);
      if (!(sv > 1e-9 && sv < 1.0 - 1e-9)) return std::nullopt;
      cur = cur + s * (img[std::size_t(i)] - cur);
      sp.points[std::size_t(i)] = cur;
    }
  }

  // Segments, length, delay.
  sp.seg_dirs.reserve(std::size_t(K) + 1);
  sp.length = T(0);
  for (int i = 0; i <= K; ++i) {
    const Vec3<T> seg = sp.points[std::size_t(i) + 1] - sp.points[std::size_t(i)];
    const T len = norm(seg);
    if (value_of(len) < 1e-9) return std::nullopt;
    sp.length += len;
    sp.seg_dirs.push_back(seg / len);
  }
  sp.tau = sp.length / T(kSpeedOfLight);

  // Hop data: oriented normals and incidence cosines.
  sp.hop_normals.reserve(std::size_t(K));
  sp.cos_inc.reserve(std::size_t(K));
  sp.materials.reserve(std::size_t(K));
  for (int i = 1; i <= K; ++i) {
    const FaceT<T>& f = faces[std::size_t(key[std::size_t(i) - 1])];
    const Vec3<T>& d_in = sp.seg_dirs[std::size_t(i) - 1];
    const T c = dot(d_in, f.n);
    const Vec3<T> neff = value_of(c) > 0.0 ? -f.n : f.n;
    sp.hop_normals.push_back(neff);
    using std::abs;
    sp.cos_inc.push_back(abs(c));
    sp.materials.push_back(f.material);
  }

  // Worst margin: containment of each solved hop point in its face, and
  // occlusion clearance of every segment against every non-adjacent face.
  T margin = T(kInf);
  using std::min;
  for (int i = 1; i <= K; ++i)
    margin = min(margin, containment_margin(sp.points[std::size_t(i)],
                                            faces[std::size_t(key[std::size_t(i) - 1])]));
  const double early = kPruneMarginWidths * soft_width;
  if (value_of(margin) <= early) return std::nullopt;
  for (int seg = 0; seg <= K; ++seg) {
    const int at_start = seg > 0 ? key[std::size_t(seg) - 1] : -1;
    const int at_end = seg < K ? key[std::size_t(seg)] : -1;
    for (std::size_t g = 0; g < faces.size(); ++g) {
      if (int(g) == at_start || int(g) == at_end) continue;
      margin = min(margin, occlusion_margin(sp.points[std::size_t(seg)],
                                            sp.points[std::size_t(seg) + 1], faces[g]));
      if (value_of(margin) <= early) return std::nullopt;
    }
  }
  sp.margin = margin;
  sp.v = soft_visibility(margin, soft_width);
  if (value_of(sp.v) < kPruneV) return std::nullopt;
  return sp;
}

// Replay a frozen key list under possibly-perturbed parameters. Keys whose
// realization fails are dropped (piecewise-constant discovery structure).
template <class T>
inline std::vector<SolvedPath<T>> replay_keys(const Scene& s, const SceneParams<T>& p,
                                              const std::set<PathKey>& keys, int tx_elem,
                                              int rx_elem, int* pruned = nullptr) {
  const auto faces = build_faces(s, p);
  const Vec3<T> tx = p.tx_element(s, tx_elem);
  const Vec3<T> rx = p.rx_element(s, rx_elem);
  std::vector<SolvedPath<T>> out;
  out.reserve(keys.size());
  int drop = 0;
  for (const PathKey& k : keys) {
    auto sp = realize_key(k, faces, tx, rx, s.sim.soft_width);
    if (sp)
      out.push_back(std::move(*sp));
    else
      ++drop;
  }
  if (pruned) *pruned = drop;
  return out;
}

inline SceneParams<double> current_params(const Scene& s) {
  return SceneParams<double>::from_scene(s);
}

// Elevation (theta from +z) and azimuth of a unit direction.
inline std::pair<double, double> dir_angles(const V3& d) {
  const double t = std::acos(std::clamp(d.z, -1.0, 1.0));
  const double p = std::atan2(d.y, d.x);
  return {t, p};
}

// Full discovery + realization for one antenna pair, double precision.
inline std::vector<PathRecord> trace_paths(const Scene& scene, int tx_elem, int rx_elem) {
  const SceneParams<double> params = current_params(scene);
  const V3 tx = params.tx_element(scene, tx_elem);
  const auto world = build_world(scene);
  const auto keys = discover_keys(world, tx, scene.sim);
  const auto solved = replay_keys(scene, params, keys, tx_elem, rx_elem);

  std::vector<PathRecord> out;
  out.reserve(solved.size());
  for (const auto& sp : solved) {
    PathRecord r;
    r.key = sp.key;
    r.points = sp.points;
    r.faces = sp.key;
    r.materials = sp.materials;
    r.cos_inc = sp.cos_inc;
    r.tau = sp.tau;
    r.v = sp.v;
    auto [dt, dp] = dir_angles(sp.seg_dirs.front());
    r.aod_theta = dt;
    r.aod_phi = dp;
    auto [at, ap] = dir_angles(-sp.seg_dirs.back());
    r.aoa_theta = at;
    r.aoa_phi = ap;
    out.push_back(std::move(r));
  }
  return out;  // std::set iteration already yields key-sorted order
}

}  // namespace rfray
