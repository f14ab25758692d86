#pragma once
// Scene parameterization: geometry + materials + transceivers + frequency
// grid + simulation knobs, with JSON load/save and the parameter editors.
// The Scene owns base meshes (immutable); world geometry = base + per-object
// translation offset.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rfray/core.hpp"
#include "rfray/mesh.hpp"

namespace rfray {

enum class Pattern { IsotropicVertical, ShortDipole };

inline Pattern pattern_from_string(const std::string& s) {
  if (s == "isotropic-vertical") return Pattern::IsotropicVertical;
  if (s == "short-dipole") return Pattern::ShortDipole;
  throw UsageError("unknown antenna pattern: " + s);
}

inline std::string pattern_to_string(Pattern p) {
  return p == Pattern::IsotropicVertical ? "isotropic-vertical" : "short-dipole";
}

struct Material {
  std::string name;
  double eps_r = 1.0;   // relative permittivity, >= 1
  double sigma = 0.0;   // conductivity S/m, >= 0
};

struct SceneObject {
  std::string id;
  TriMesh mesh;           // base geometry, immutable after load
  int material = -1;      // index into Scene::materials
  V3 offset{};            // rigid translation applied to all vertices
  bool movable = false;
  bool z_locked = true;
  std::string mesh_path;  // resolved path, used on save
};

// Uniform linear array: element k sits at origin + k*spacing*axis.
struct ArraySpec {
  V3 origin{};
  V3 axis{1, 0, 0};
  double spacing = 0.089;
  int count = 1;

  V3 element(int k) const { return origin + (k * spacing) * axis; }
};

struct Transceiver {
  ArraySpec array;
  Pattern pattern = Pattern::IsotropicVertical;
};

struct FreqGrid {
  double fc = 5e9;       // Hz
  double df = 156250.0;  // Hz
  int ns = 128;

  // Symmetric grid centered on fc spanning ns*df.
  double f(int j) const { return fc + (double(j) - double(ns) * 0.5) * df; }
};

struct SimConfig {
  int max_depth = 3;
  int n_rays = 20000;
  std::uint64_t seed = 1;
  double capture_radius = 0.1;  // m, discovery acceptance radius
  double soft_width = 0.02;     // m, soft-visibility transition width
};

struct Scene {
  std::vector<Material> materials;
  std::vector<SceneObject> objects;
  Transceiver tx, rx;
  FreqGrid freq;
  SimConfig sim;

  int material_index(const std::string& name) const {
    for (std::size_t i = 0; i < materials.size(); ++i)
      if (materials[i].name == name) return int(i);
    return -1;
  }
  int object_index(const std::string& id) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].id == id) return int(i);
    return -1;
  }
  int face_count() const {
    int n = 0;
    for (auto& o : objects) n += int(o.mesh.faces.size());
    return n;
  }
};

inline void validate_scene(const Scene& s) {
  for (auto& m : s.materials) {
    if (m.eps_r < 1.0) throw UsageError("material " + m.name + ": eps_r must be >= 1");
    if (m.sigma < 0.0) throw UsageError("material " + m.name + ": sigma must be >= 0");
  }
  for (auto& o : s.objects) {
    if (o.material < 0 || o.material >= int(s.materials.size()))
      throw UsageError("object " + o.id + ": unresolved material reference");
  }
  for (const Transceiver* t : {&s.tx, &s.rx}) {
    if (t->array.count < 1) throw UsageError("array count must be >= 1");
    if (t->array.spacing <= 0.0) throw UsageError("array spacing must be > 0");
  }
  if (s.freq.ns < 1) throw UsageError("freq.ns must be >= 1");
  if (s.freq.f(0) <= 0.0) throw UsageError("frequency grid extends to non-positive frequencies");
  if (s.sim.max_depth < 0) throw UsageError("sim.max_depth must be >= 0");
  if (s.sim.n_rays < 1) throw UsageError("sim.n_rays must be >= 1");
  if (s.sim.capture_radius <= 0.0) throw UsageError("sim.capture_radius_m must be > 0");
  if (s.sim.soft_width <= 0.0) throw UsageError("sim.soft_width_m must be > 0");
}

namespace detail {

using Json = nlohmann::ordered_json;

inline V3 json_vec3(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw UsageError(field + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline ArraySpec json_array_spec(const Json& j, const std::string& field) {
  if (!j.contains("origin")) throw UsageError(field + ".origin is required");
  ArraySpec a;
  a.origin = json_vec3(j.at("origin"), field + ".origin");
  if (j.contains("axis")) a.axis = normalized(json_vec3(j.at("axis"), field + ".axis"));
  if (j.contains("spacing")) a.spacing = j.at("spacing").get<double>();
  if (j.contains("count")) a.count = j.at("count").get<int>();
  return a;
}

}  // namespace detail

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open scene file: " + path);
  detail::Json j;
  try {
    j = detail::Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("scene parse error in " + path + ": " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();

  Scene s;
  try {
    if (j.contains("materials")) {
      for (auto& [name, jm] : j.at("materials").items()) {
        Material m;
        m.name = name;
        m.eps_r = jm.at("eps_r").get<double>();
        m.sigma = jm.value("sigma", 0.0);
        s.materials.push_back(m);
      }
    }
    if (j.contains("objects")) {
      for (auto& [id, jo] : j.at("objects").items()) {
        SceneObject o;
        o.id = id;
        std::string mp = jo.at("mesh_path").get<std::string>();
        std::filesystem::path p(mp);
        if (p.is_relative()) p = dir / p;
        o.mesh_path = p.string();
        o.mesh = load_obj(o.mesh_path);
        const std::string mat = jo.at("material").get<std::string>();
        o.material = s.material_index(mat);
        if (o.material < 0)
          throw UsageError("object " + id + ": unknown material \"" + mat + "\"");
        if (jo.contains("position")) o.offset = detail::json_vec3(jo.at("position"), id + ".position");
        o.movable = jo.value("movable", false);
        o.z_locked = jo.value("z_locked", true);
        s.objects.push_back(std::move(o));
      }
    }
    if (!j.contains("tx") || !j.contains("rx")) throw UsageError("scene requires tx and rx");
    s.tx.array = detail::json_array_spec(j.at("tx").at("array"), "tx.array");
    s.tx.pattern = pattern_from_string(j.at("tx").value("pattern", "isotropic-vertical"));
    s.rx.array = detail::json_array_spec(j.at("rx").at("array"), "rx.array");
    s.rx.pattern = pattern_from_string(j.at("rx").value("pattern", "isotropic-vertical"));
    if (j.contains("freq")) {
      auto& jf = j.at("freq");
      s.freq.fc = jf.value("fc_hz", 5e9);
      s.freq.df = jf.value("df_hz", 156250.0);
      s.freq.ns = jf.value("ns", 128);
    }
    if (j.contains("sim")) {
      auto& js = j.at("sim");
      s.sim.max_depth = js.value("max_depth", 3);
      s.sim.n_rays = js.value("n_rays", 20000);
      s.sim.seed = js.value("seed", std::uint64_t(1));
      s.sim.capture_radius = js.value("capture_radius_m", 0.1);
      s.sim.soft_width = js.value("soft_width_m", 0.02);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("scene schema error in " + path + ": " + e.what());
  }
  validate_scene(s);
  return s;
}

inline void save_scene(const Scene& s, const std::string& path) {
  detail::Json j;
  j["materials"] = detail::Json::object();
  for (auto& m : s.materials)
    j["materials"][m.name] = {{"eps_r", m.eps_r}, {"sigma", m.sigma}};
  j["objects"] = detail::Json::object();
  for (auto& o : s.objects) {
    j["objects"][o.id] = {{"mesh_path", o.mesh_path},
                          {"material", s.materials[o.material].name},
                          {"position", {o.offset.x, o.offset.y, o.offset.z}},
                          {"movable", o.movable},
                          {"z_locked", o.z_locked}};
  }
  auto dump_trx = [&](const Transceiver& t) {
    return detail::Json{
        {"array",
         {{"origin", {t.array.origin.x, t.array.origin.y, t.array.origin.z}},
          {"axis", {t.array.axis.x, t.array.axis.y, t.array.axis.z}},
          {"spacing", t.array.spacing},
          {"count", t.array.count}}},
        {"pattern", pattern_to_string(t.pattern)}};
  };
  j["tx"] = dump_trx(s.tx);
  j["rx"] = dump_trx(s.rx);
  j["freq"] = {{"fc_hz", s.freq.fc}, {"df_hz", s.freq.df}, {"ns", s.freq.ns}};
  j["sim"] = {{"max_depth", s.sim.max_depth},
              {"n_rays", s.sim.n_rays},
              {"seed", s.sim.seed},
              {"capture_radius_m", s.sim.capture_radius},
              {"soft_width_m", s.sim.soft_width}};
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write scene file: " + path);
  out << j.dump(2) << "\n";
}

// Additive translation of one object's rigid offset.
inline void translate_object(Scene& s, const std::string& id, const V3& offset) {
  int idx = s.object_index(id);
  if (idx < 0) throw UsageError("translate_object: unknown object \"" + id + "\"");
  SceneObject& o = s.objects[idx];
  if (o.z_locked && offset.z != 0.0)
    throw UsageError("translate_object: object \"" + id + "\" is z-locked");
  o.offset += offset;
}

inline void set_material(Scene& s, const std::string& name, double eps_r, double sigma) {
  int idx = s.material_index(name);
  if (idx < 0) throw UsageError("set_material: unknown material \"" + name + "\"");
  if (eps_r < 1.0) throw UsageError("set_material: eps_r must be >= 1");
  if (sigma < 0.0) throw UsageError("set_material: sigma must be >= 0");
  s.materials[idx].eps_r = eps_r;
  s.materials[idx].sigma = sigma;
}

}  // namespace rfray
