#pragma once
// Differentiable view of the continuous scene parameters. The Scene itself
// stays in double; SceneParams<T> carries the values the physics actually
// consumes (object offsets, array origins, material constants) in the scalar
// type of the evaluation, so seeding dual slots here differentiates the whole
// pipeline downstream.

#include <string>
#include <vector>

#include "rfray/core.hpp"
#include "rfray/scene.hpp"

namespace rfray {

template <class T>
struct SceneParams {
  std::vector<Vec3<T>> object_offset;  // aligned with Scene::objects
  Vec3<T> tx_origin, rx_origin;
  std::vector<T> eps_r, sigma;         // aligned with Scene::materials

  static SceneParams from_scene(const Scene& s) {
    SceneParams p;
    p.object_offset.reserve(s.objects.size());
    for (auto& o : s.objects)
      p.object_offset.push_back({T(o.offset.x), T(o.offset.y), T(o.offset.z)});
    p.tx_origin = {T(s.tx.array.origin.x), T(s.tx.array.origin.y), T(s.tx.array.origin.z)};
    p.rx_origin = {T(s.rx.array.origin.x), T(s.rx.array.origin.y), T(s.rx.array.origin.z)};
    p.eps_r.reserve(s.materials.size());
    for (auto& m : s.materials) {
      p.eps_r.push_back(T(m.eps_r));
      p.sigma.push_back(T(m.sigma));
    }
    return p;
  }

  Vec3<T> tx_element(const Scene& s, int k) const {
    return tx_origin + (T(k * s.tx.array.spacing)) * Vec3<T>{T(s.tx.array.axis.x), T(s.tx.array.axis.y), T(s.tx.array.axis.z)};
  }
  Vec3<T> rx_element(const Scene& s, int k) const {
    return rx_origin + (T(k * s.rx.array.spacing)) * Vec3<T>{T(s.rx.array.axis.x), T(s.rx.array.axis.y), T(s.rx.array.axis.z)};
  }
};

// Scene copy whose continuous fields are overwritten with the primal values
// of params; discovery and other double-only stages run on this geometry.
template <class T>
inline Scene scene_at(const Scene& s, const SceneParams<T>& p) {
  Scene out = s;
  for (std::size_t i = 0; i < out.objects.size(); ++i)
    out.objects[i].offset = {value_of(p.object_offset[i].x), value_of(p.object_offset[i].y),
                             value_of(p.object_offset[i].z)};
  out.tx.array.origin = {value_of(p.tx_origin.x), value_of(p.tx_origin.y),
                         value_of(p.tx_origin.z)};
  out.rx.array.origin = {value_of(p.rx_origin.x), value_of(p.rx_origin.y),
                         value_of(p.rx_origin.z)};
  for (std::size_t i = 0; i < out.materials.size(); ++i) {
    out.materials[i].eps_r = value_of(p.eps_r[i]);
    out.materials[i].sigma = value_of(p.sigma[i]);
  }
  return out;
}

// One scalar scene parameter: a translation component, an array origin
// component, or a material constant.
enum class ParamKind {
  ObjectX, ObjectY, ObjectZ,
  TxX, TxY, TxZ,
  RxX, RxY, RxZ,
  MaterialEps, MaterialSigma,
};

struct ParamRef {
  ParamKind kind;
  std::string target;  // object id or material name; unused for tx/rx
};

using ParamSelector = std::vector<ParamRef>;

inline bool is_material_kind(ParamKind k) {
  return k == ParamKind::MaterialEps || k == ParamKind::MaterialSigma;
}

inline void validate_selector(const Scene& s, const ParamSelector& sel) {
  for (auto& p : sel) {
    switch (p.kind) {
      case ParamKind::ObjectX:
      case ParamKind::ObjectY:
      case ParamKind::ObjectZ: {
        int idx = s.object_index(p.target);
        if (idx < 0) throw UsageError("selector: unknown object \"" + p.target + "\"");
        if (!s.objects[idx].movable)
          throw UsageError("selector: object \"" + p.target + "\" is not movable");
        if (p.kind == ParamKind::ObjectZ && s.objects[idx].z_locked)
          throw UsageError("selector: object \"" + p.target + "\" is z-locked");
        break;
      }
      case ParamKind::MaterialEps:
      case ParamKind::MaterialSigma:
        if (s.material_index(p.target) < 0)
          throw UsageError("selector: unknown material \"" + p.target + "\"");
        break;
      default:
        break;  // tx/rx components need no target
    }
  }
}

// Read the selected scalar out of a Scene.
inline double get_param(const Scene& s, const ParamRef& p) {
  switch (p.kind) {
    case ParamKind::ObjectX: return s.objects[s.object_index(p.target)].offset.x;
    case ParamKind::ObjectY: return s.objects[s.object_index(p.target)].offset.y;
    case ParamKind::ObjectZ: return s.objects[s.object_index(p.target)].offset.z;
    case ParamKind::TxX: return s.tx.array.origin.x;
    case ParamKind::TxY: return s.tx.array.origin.y;
    case ParamKind::TxZ: return s.tx.array.origin.z;
    case ParamKind::RxX: return s.rx.array.origin.x;
    case ParamKind::RxY: return s.rx.array.origin.y;
    case ParamKind::RxZ: return s.rx.array.origin.z;
    case ParamKind::MaterialEps: return s.materials[s.material_index(p.target)].eps_r;
    case ParamKind::MaterialSigma: return s.materials[s.material_index(p.target)].sigma;
  }
  throw NumericError("get_param: bad kind");
}

// Write the selected scalar into a Scene (used by finite differences and by
// the optimizers between gradient evaluations).
inline void set_param(Scene& s, const ParamRef& p, double value) {
  switch (p.kind) {
    case ParamKind::ObjectX: s.objects[s.object_index(p.target)].offset.x = value; return;
    case ParamKind::ObjectY: s.objects[s.object_index(p.target)].offset.y = value; return;
    case ParamKind::ObjectZ: s.objects[s.object_index(p.target)].offset.z = value; return;
    case ParamKind::TxX: s.tx.array.origin.x = value; return;
    case ParamKind::TxY: s.tx.array.origin.y = value; return;
    case ParamKind::TxZ: s.tx.array.origin.z = value; return;
    case ParamKind::RxX: s.rx.array.origin.x = value; return;
    case ParamKind::RxY: s.rx.array.origin.y = value; return;
    case ParamKind::RxZ: s.rx.array.origin.z = value; return;
    case ParamKind::MaterialEps: s.materials[s.material_index(p.target)].eps_r = value; return;
    case ParamKind::MaterialSigma: s.materials[s.material_index(p.target)].sigma = value; return;
  }
  throw NumericError("set_param: bad kind");
}

// Seed derivative slot `slot` of the selected parameter inside params.
template <class T>
inline void seed_param(const Scene& s, SceneParams<T>& params, const ParamRef& p, int slot) {
  auto seed = [&](T& x) { x = T::seeded(value_of(x), slot); };
  switch (p.kind) {
    case ParamKind::ObjectX: seed(params.object_offset[s.object_index(p.target)].x); return;
    case ParamKind::ObjectY: seed(params.object_offset[s.object_index(p.target)].y); return;
    case ParamKind::ObjectZ: seed(params.object_offset[s.object_index(p.target)].z); return;
    case ParamKind::TxX: seed(params.tx_origin.x); return;
    case ParamKind::TxY: seed(params.tx_origin.y); return;
    case ParamKind::TxZ: seed(params.tx_origin.z); return;
    case ParamKind::RxX: seed(params.rx_origin.x); return;
    case ParamKind::RxY: seed(params.rx_origin.y); return;
    case ParamKind::RxZ: seed(params.rx_origin.z); return;
    case ParamKind::MaterialEps: seed(params.eps_r[s.material_index(p.target)]); return;
    case ParamKind::MaterialSigma: seed(params.sigma[s.material_index(p.target)]); return;
  }
}

}  // namespace rfray
