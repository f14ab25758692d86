#pragma once
// Triangle meshes and the ASCII OBJ-subset loader (v/f lines only, 1-based
// plain indices, triangles only).

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rfray/core.hpp"

namespace rfray {

struct TriMesh {
  std::vector<V3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<V3> normals;  // unit, normalize((v2-v1) x (v3-v2)) per face
};

inline double face_area(const TriMesh& m, std::size_t f) {
  const V3& a = m.vertices[m.faces[f][0]];
  const V3& b = m.vertices[m.faces[f][1]];
  const V3& c = m.vertices[m.faces[f][2]];
  return 0.5 * norm(cross(b - a, c - b));
}

inline void compute_normals(TriMesh& m) {
  m.normals.clear();
  m.normals.reserve(m.faces.size());
  for (auto& f : m.faces) {
    const V3& v1 = m.vertices[f[0]];
    const V3& v2 = m.vertices[f[1]];
    const V3& v3 = m.vertices[f[2]];
    m.normals.push_back(normalized(cross(v2 - v1, v3 - v2)));
  }
}

inline void validate_mesh(const TriMesh& m, const std::string& label) {
  const int nv = int(m.vertices.size());
  for (std::size_t i = 0; i < m.faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (m.faces[i][k] < 0 || m.faces[i][k] >= nv)
        throw UsageError(label + ": face " + std::to_string(i) + " references vertex " +
                         std::to_string(m.faces[i][k]) + " out of range");
    }
    if (face_area(m, i) <= 1e-12)
      throw UsageError(label + ": face " + std::to_string(i) + " is degenerate (area <= 1e-12)");
  }
}

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open mesh file: " + path);
  TriMesh m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z))
        throw UsageError(path + ":" + std::to_string(lineno) + ": malformed vertex line");
      m.vertices.push_back({x, y, z});
    } else if (tag == "f") {
      std::array<int, 3> idx{};
      int extra;
      if (!(ss >> idx[0] >> idx[1] >> idx[2]))
        throw UsageError(path + ":" + std::to_string(lineno) + ": malformed face line");
      if (ss >> extra)
        throw UsageError(path + ":" + std::to_string(lineno) + ": only triangles are supported");
      for (auto& i : idx) i -= 1;  // OBJ is 1-based
      m.faces.push_back(idx);
    }
    // Other tags (vn, vt, o, g, s, usemtl, mtllib) are ignored.
  }
  validate_mesh(m, path);
  compute_normals(m);
  return m;
}

inline void save_obj(const TriMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write mesh file: " + path);
  char buf[128];
  for (auto& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (auto& f : m.faces) out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

// Axis-aligned box mesh (12 triangles), verts at [lo, hi] corners.
inline TriMesh make_box(const V3& lo, const V3& hi) {
  TriMesh m;
  m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  m.faces = {{0, 1, 2}, {0, 2, 3},    // bottom
             {4, 6, 5}, {4, 7, 6},    // top
             {0, 4, 5}, {0, 5, 1},    // y = lo
             {3, 2, 6}, {3, 6, 7},    // y = hi
             {0, 3, 7}, {0, 7, 4},    // x = lo
             {1, 5, 6}, {1, 6, 2}};   // x = hi
  compute_normals(m);
  return m;
}

}  // namespace rfray
