#pragma once
// Low-level ray/triangle geometry. The discovery side runs in double; the
// replay side (plane mirroring, containment and occlusion margins) is
// templated so dual scalars flow through it.

#include <optional>
#include <vector>

#include "rfray/core.hpp"
#include "rfray/scene.hpp"

namespace rfray {

// World-space face snapshot used by discovery (double only).
struct WorldFace {
  V3 a, b, c;   // translated vertices v1, v2, v3
  V3 n;         // unit normal, normalize((b-a) x (c-b))
  int object;   // index into Scene::objects
  int material; // index into Scene::materials
};

inline std::vector<WorldFace> build_world(const Scene& s) {
  std::vector<WorldFace> w;
  w.reserve(s.face_count());
  for (std::size_t oi = 0; oi < s.objects.size(); ++oi) {
    const SceneObject& o = s.objects[oi];
    for (std::size_t fi = 0; fi < o.mesh.faces.size(); ++fi) {
      const auto& f = o.mesh.faces[fi];
      w.push_back({o.mesh.vertices[f[0]] + o.offset, o.mesh.vertices[f[1]] + o.offset,
                   o.mesh.vertices[f[2]] + o.offset, o.mesh.normals[fi], int(oi), o.material});
    }
  }
  return w;
}

struct HitD {
  int face = -1;
  double t = 0;       // ray parameter (distance, unit direction)
  V3 q{};             // hit point
  double m1 = 0, m2 = 0;  // weights of v1 and v2; v3 takes 1 - m1 - m2
};

// Nearest intersection with t > t_min. `skip` suppresses the face the ray
// just left so the self-intersection guard is independent of epsilon luck.
inline std::optional<HitD> intersect(const V3& origin, const V3& dir,
                                     const std::vector<WorldFace>& faces, double t_min,
                                     int skip = -1) {
  std::optional<HitD> best;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (int(i) == skip) continue;
    const WorldFace& f = faces[i];
    const V3 e1 = f.b - f.a, e2 = f.c - f.a;
    const V3 p = cross(dir, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < 1e-14) continue;  // parallel
    const double inv = 1.0 / det;
    const V3 s = origin - f.a;
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) continue;
    const V3 qv = cross(s, e1);
    const double v = dot(dir, qv) * inv;
    if (v < 0.0 || u + v > 1.0) continue;
    const double t = dot(e2, qv) * inv;
    if (t <= t_min) continue;
    if (!best || t < best->t) {
      HitD h;
      h.face = int(i);
      h.t = t;
      h.q = origin + t * dir;
      h.m1 = 1.0 - u - v;  // weight of v1
      h.m2 = u;            // weight of v2
      best = h;
    }
  }
  return best;
}

// ---- Templated pieces used by the exact per-key replay ----

template <class T>
struct FaceT {
  Vec3<T> a, b, c;
  Vec3<T> n;  // unit; translation-invariant so lifted straight from double
  int material;
};

// Mirror a point across the plane through `a` with unit normal `n`.
template <class T>
inline Vec3<T> mirror_point(const Vec3<T>& p, const Vec3<T>& a, const Vec3<T>& n) {
  return p - (T(2) * dot(p - a, n)) * n;
}

// Signed in-plane distance from point `x` (assumed on the face plane) to the
// triangle boundary: positive inside, negative outside, zero on an edge.
template <class T>
inline T containment_margin(const Vec3<T>& x, const FaceT<T>& f) {
  auto edge_dist = [&](const Vec3<T>& p, const Vec3<T>& q) {
    const Vec3<T> inward = normalized(cross(f.n, q - p));
    return dot(x - p, inward);
  };
  using std::min;
  return min(edge_dist(f.a, f.b), min(edge_dist(f.b, f.c), edge_dist(f.c, f.a)));
}

// Occlusion margin of segment [p, q] against one face: +inf when the segment
// does not cross the face plane (or touches it at an endpoint, which is how
// bounce faces and their coplanar neighbors are excluded), otherwise the
// negated containment margin of the crossing point: negative = blocked by
// that depth, positive = clearance from the silhouette edge.
template <class T>
inline T occlusion_margin(const Vec3<T>& p, const Vec3<T>& q, const FaceT<T>& f,
                          double endpoint_tol = 1e-9) {
  const T sp = dot(p - f.a, f.n);
  const T sq = dot(q - f.a, f.n);
  const double spv = value_of(sp), sqv = value_of(sq);
  if (std::abs(spv) < endpoint_tol || std::abs(sqv) < endpoint_tol) return T(kInf);
  if (spv * sqv >= 0.0) return T(kInf);
  const T s = sp / (sp - sq);
  const Vec3<T> x = p + s * (q - p);
  return -containment_margin(x, f);
}

// Soft visibility weight: logistic in margin / width. Saturates to exactly
// 1.0 in double once margin exceeds ~40 widths, and to 1.0 for +inf margins
// (free space), which is what makes clean line-of-sight channels exact.
template <class T>
inline T soft_visibility(const T& margin, double soft_width) {
  if (value_of(margin) == kInf) return T(1);  // avoids inf*0 in dual arithmetic
  using std::exp;
  return T(1) / (T(1) + exp(-margin / T(soft_width)));
}

}  // namespace rfray
