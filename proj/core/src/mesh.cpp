#include "scomp/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ply_detail.hpp"
#include "scomp/error.hpp"

namespace scomp {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// "3", "3/1", "3//2", "3/1/2" -> vertex index token
long obj_vertex_ref(const std::string& token, const std::string& where) {
  const std::size_t slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  try {
    return std::stol(head);
  } catch (...) {
    throw ParseError(where + ": bad face vertex reference '" + token + "'");
  }
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  TriangleMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    const std::string where = path + ":" + std::to_string(line_no);
    if (tag == "v") {
      Point3 p;
      if (!(ls >> p.x >> p.y >> p.z)) throw ParseError(where + ": malformed vertex");
      if (!p.finite()) throw ParseError(where + ": non-finite vertex coordinate");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ls >> token) {
        long ref = obj_vertex_ref(token, where);
        if (ref < 0) ref = static_cast<long>(mesh.vertices.size()) + ref + 1;
        if (ref < 1 || ref > static_cast<long>(mesh.vertices.size()))
          throw ParseError(where + ": face references missing vertex");
        poly.push_back(static_cast<std::uint32_t>(ref - 1));
      }
      if (poly.size() < 3) throw ParseError(where + ": face with fewer than 3 vertices");
      for (std::size_t k = 2; k < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[k - 1], poly[k]});
    }
    // vn / vt / usemtl / o / g / s and friends are irrelevant here.
  }
  return mesh;
}

TriangleMesh load_ply_mesh(const std::string& path) {
  detail::PlyReader reader(path);
  TriangleMesh mesh;

  int vertex_idx = -1, face_idx = -1;
  for (std::size_t i = 0; i < reader.elements().size(); ++i) {
    if (reader.elements()[i].name == "vertex") vertex_idx = static_cast<int>(i);
    if (reader.elements()[i].name == "face") face_idx = static_cast<int>(i);
  }
  if (vertex_idx < 0) throw ParseError(path + ": no vertex element");
  if (face_idx < 0) throw ParseError(path + ": no face element (not a mesh)");

  const detail::PlyElement& vertex = reader.elements()[vertex_idx];
  const int px = vertex.property_index("x");
  const int py = vertex.property_index("y");
  const int pz = vertex.property_index("z");
  if (px < 0 || py < 0 || pz < 0) throw ParseError(path + ": vertex element lacks x/y/z");

  const detail::PlyElement& face = reader.elements()[face_idx];
  int list_pos = -1;
  int list_counter = 0;
  for (std::size_t i = 0; i < face.properties.size(); ++i) {
    if (face.properties[i].is_list) {
      const std::string& name = face.properties[i].name;
      if (name == "vertex_indices" || name == "vertex_index") list_pos = list_counter;
      ++list_counter;
    }
  }
  if (list_pos < 0) throw ParseError(path + ": face element lacks vertex_indices");

  for (std::size_t e = 0; e < reader.elements().size(); ++e) {
    if (static_cast<int>(e) == vertex_idx) {
      reader.read_element(e, [&](const detail::PlyRow& row, const std::string& where) {
        const Point3 p{row.scalars[px], row.scalars[py], row.scalars[pz]};
        if (!p.finite()) throw ParseError(path + ": " + where + ": non-finite vertex");
        mesh.vertices.push_back(p);
      });
    } else if (static_cast<int>(e) == face_idx) {
      reader.read_element(e, [&](const detail::PlyRow& row, const std::string& where) {
        const std::vector<double>& poly = row.lists[list_pos];
        if (poly.size() < 3) throw ParseError(path + ": " + where + ": degenerate face");
        for (std::size_t k = 2; k < poly.size(); ++k) {
          std::array<std::uint32_t, 3> tri{};
          const double ids[3] = {poly[0], poly[k - 1], poly[k]};
          for (int c = 0; c < 3; ++c) {
            if (ids[c] < 0 || ids[c] >= static_cast<double>(mesh.vertices.size()))
              throw ParseError(path + ": " + where + ": face references missing vertex");
            tri[c] = static_cast<std::uint32_t>(ids[c]);
          }
          mesh.faces.push_back(tri);
        }
      });
    } else {
      reader.skip_element(e);
    }
  }
  return mesh;
}

double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  if (ends_with(path, ".obj") || ends_with(path, ".OBJ")) return load_obj(path);
  return load_ply_mesh(path);
}

void save_mesh_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  char buf[160];
  for (const Point3& v : mesh.vertices) {
    const int n = std::snprintf(buf, sizeof buf, "v %.6f %.6f %.6f\n", v.x, v.y, v.z);
    out.write(buf, n);
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces)
    area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return area;
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, Rng& rng) {
  if (mesh.faces.empty()) throw Error("sample_surface: mesh has no faces");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw Error("sample_surface: mesh has zero surface area");

  PointCloud out;
  out.points.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r0 = rng.uniform() * total;
    const std::size_t fi = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), r0) - cumulative.begin());
    const auto& f = mesh.faces[std::min(fi, mesh.faces.size() - 1)];
    const Point3& a = mesh.vertices[f[0]];
    const Point3& b = mesh.vertices[f[1]];
    const Point3& c = mesh.vertices[f[2]];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    out.points.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
  }
  return out;
}

PointCloud farthest_point_subsample(const PointCloud& cloud, std::size_t count, Rng& rng) {
  if (cloud.empty()) throw Error("farthest_point_subsample: empty cloud");
  if (count >= cloud.size()) return cloud;
  if (count == 0) return {};

  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::vector<double> min_d2(cloud.size(), std::numeric_limits<double>::infinity());

  std::size_t current = rng.uniform_index(cloud.size());
  picked.push_back(current);
  while (picked.size() < count) {
    double best_d2 = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d2 = squared_distance(cloud.points[i], cloud.points[current]);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    picked.push_back(best);
    current = best;
  }

  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i : picked) {
    out.points.push_back(cloud.points[i]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[i]);
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[i]);
  }
  return out;
}

}  // namespace scomp
