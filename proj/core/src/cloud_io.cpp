#include "scomp/cloud_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ply_detail.hpp"
#include "scomp/error.hpp"

namespace scomp {

namespace {

struct VertexSchema {
  int x = -1, y = -1, z = -1;
  int nx = -1, ny = -1, nz = -1;
  int class_id = -1;
  int provenance = -1;
};

VertexSchema resolve_schema(const detail::PlyElement& vertex, const std::string& path) {
  VertexSchema s;
  s.x = vertex.property_index("x");
  s.y = vertex.property_index("y");
  s.z = vertex.property_index("z");
  if (s.x < 0 || s.y < 0 || s.z < 0)
    throw ParseError(path + ": vertex element lacks x/y/z properties");
  s.nx = vertex.property_index("nx");
  s.ny = vertex.property_index("ny");
  s.nz = vertex.property_index("nz");
  const bool any_n = s.nx >= 0 || s.ny >= 0 || s.nz >= 0;
  const bool all_n = s.nx >= 0 && s.ny >= 0 && s.nz >= 0;
  if (any_n && !all_n) throw ParseError(path + ": incomplete normal properties");
  s.class_id = vertex.property_index("class_id");
  s.provenance = vertex.property_index("provenance");
  return s;
}

ProvenancedCloud load_ply(const std::string& path) {
  detail::PlyReader reader(path);

  int vertex_index = -1;
  for (std::size_t i = 0; i < reader.elements().size(); ++i)
    if (reader.elements()[i].name == "vertex") {
      vertex_index = static_cast<int>(i);
      break;
    }
  if (vertex_index < 0) throw ParseError(path + ": no vertex element");

  const detail::PlyElement& vertex = reader.elements()[vertex_index];
  const VertexSchema schema = resolve_schema(vertex, path);

  ProvenancedCloud out;
  out.cloud.points.reserve(vertex.count);
  if (schema.nx >= 0) out.cloud.normals.reserve(vertex.count);
  if (schema.class_id >= 0) out.cloud.labels.reserve(vertex.count);
  if (schema.provenance >= 0) out.provenance.reserve(vertex.count);

  for (std::size_t e = 0; e < reader.elements().size(); ++e) {
    if (static_cast<int>(e) != vertex_index) {
      reader.skip_element(e);
      continue;
    }
    reader.read_element(e, [&](const detail::PlyRow& row, const std::string& where) {
      const Point3 p{row.scalars[schema.x], row.scalars[schema.y], row.scalars[schema.z]};
      if (!p.finite())
        throw ParseError(path + ": " + where + ": non-finite coordinate");
      out.cloud.points.push_back(p);
      if (schema.nx >= 0) {
        Point3 n{row.scalars[schema.nx], row.scalars[schema.ny], row.scalars[schema.nz]};
        if (!n.finite()) throw ParseError(path + ": " + where + ": non-finite normal");
        const double len = n.norm();
        if (len != 0.0) {
          if (std::abs(len - 1.0) > 1e-3)
            throw ParseError(path + ": " + where + ": normal is not unit length");
          n = n / len;
        }
        out.cloud.normals.push_back(n);
      }
      if (schema.class_id >= 0) {
        const double v = row.scalars[schema.class_id];
        if (v < 0.0 || v > 255.0)
          throw ParseError(path + ": " + where + ": class_id out of uint8 range");
        out.cloud.labels.push_back(static_cast<std::uint8_t>(v));
      }
      if (schema.provenance >= 0) {
        const double v = row.scalars[schema.provenance];
        if (v < 0.0 || v > 65535.0)
          throw ParseError(path + ": " + where + ": provenance out of uint16 range");
        out.provenance.push_back(static_cast<std::uint16_t>(v));
      }
    });
  }
  return out;
}

PointCloud load_pcd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::vector<std::string> fields;
  std::size_t points = 0;
  bool have_points = false;
  bool data_ascii = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "FIELDS") {
      std::string f;
      while (ls >> f) fields.push_back(f);
    } else if (key == "POINTS") {
      ls >> points;
      have_points = true;
    } else if (key == "DATA") {
      std::string mode;
      ls >> mode;
      if (mode != "ascii")
        throw ParseError(path + ":" + std::to_string(line_no) + ": only ascii PCD is supported");
      data_ascii = true;
      break;
    }
    // VERSION / SIZE / TYPE / COUNT / WIDTH / HEIGHT / VIEWPOINT are not needed
    // for ascii payloads.
  }
  if (!data_ascii) throw ParseError(path + ": missing DATA ascii section");
  if (!have_points) throw ParseError(path + ": missing POINTS line");

  int ix = -1, iy = -1, iz = -1, ilabel = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == "x") ix = static_cast<int>(i);
    if (fields[i] == "y") iy = static_cast<int>(i);
    if (fields[i] == "z") iz = static_cast<int>(i);
    if (fields[i] == "label") ilabel = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path + ": PCD lacks x/y/z fields");

  PointCloud cloud;
  cloud.points.reserve(points);
  if (ilabel >= 0) cloud.labels.reserve(points);

  for (std::size_t r = 0; r < points; ++r) {
    if (!std::getline(in, line))
      throw ParseError(path + ": unexpected end of file at point " + std::to_string(r));
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!(ls >> token))
        throw ParseError(path + ":" + std::to_string(line_no) + ": short point record");
      char* end = nullptr;
      values[c] = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size())
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric token '" + token +
                         "'");
    }
    const Point3 p{values[ix], values[iy], values[iz]};
    if (!p.finite())
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite coordinate");
    cloud.points.push_back(p);
    if (ilabel >= 0) {
      if (values[ilabel] < 0.0 || values[ilabel] > 255.0)
        throw ParseError(path + ":" + std::to_string(line_no) + ": label out of uint8 range");
      cloud.labels.push_back(static_cast<std::uint8_t>(values[ilabel]));
    }
  }
  return cloud;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_ply(const PointCloud& cloud, const std::vector<std::uint16_t>* provenance,
               const std::string& path) {
  if (cloud.has_normals() && cloud.normals.size() != cloud.size())
    throw Error("save_cloud: normals length mismatch");
  if (cloud.has_labels() && cloud.labels.size() != cloud.size())
    throw Error("save_cloud: labels length mismatch");
  if (provenance && provenance->size() != cloud.size())
    throw Error("save_cloud: provenance length mismatch");

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");

  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\n"
      << "property double y\n"
      << "property double z\n";
  if (cloud.has_normals())
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (cloud.has_labels()) out << "property uchar class_id\n";
  if (provenance) out << "property ushort provenance\n";
  out << "end_header\n";

  char buf[256];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    int n = std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f", p.x, p.y, p.z);
    out.write(buf, n);
    if (cloud.has_normals()) {
      const Point3& v = cloud.normals[i];
      n = std::snprintf(buf, sizeof buf, " %.6f %.6f %.6f", v.x, v.y, v.z);
      out.write(buf, n);
    }
    if (cloud.has_labels()) out << ' ' << static_cast<int>(cloud.labels[i]);
    if (provenance) out << ' ' << (*provenance)[i];
    out << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace

PointCloud load_cloud(const std::string& path) {
  if (ends_with(path, ".pcd") || ends_with(path, ".PCD")) return load_pcd(path);
  return load_ply(path).cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
  write_ply(cloud, nullptr, path);
}

ProvenancedCloud load_cloud_with_provenance(const std::string& path) { return load_ply(path); }

void save_cloud_with_provenance(const PointCloud& cloud,
                                const std::vector<std::uint16_t>& provenance,
                                const std::string& path) {
  write_ply(cloud, &provenance, path);
}

double round_to_file_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return std::strtod(buf, nullptr);
}

}  // namespace scomp
