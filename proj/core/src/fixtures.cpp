#include "scomp/fixtures.hpp"

#include <cstdio>
#include <filesystem>

#include "scomp/error.hpp"

namespace scomp {

namespace fs = std::filesystem;

void append_box(TriangleMesh& mesh, const Point3& lo, const Point3& hi) {
  const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back({lo.x, lo.y, lo.z});  // 0
  mesh.vertices.push_back({hi.x, lo.y, lo.z});  // 1
  mesh.vertices.push_back({hi.x, hi.y, lo.z});  // 2
  mesh.vertices.push_back({lo.x, hi.y, lo.z});  // 3
  mesh.vertices.push_back({lo.x, lo.y, hi.z});  // 4
  mesh.vertices.push_back({hi.x, lo.y, hi.z});  // 5
  mesh.vertices.push_back({hi.x, hi.y, hi.z});  // 6
  mesh.vertices.push_back({lo.x, hi.y, hi.z});  // 7
  const std::uint32_t quads[6][4] = {
      {0, 1, 2, 3},  // bottom
      {4, 7, 6, 5},  // top
      {0, 4, 5, 1},  // -y
      {2, 6, 7, 3},  // +y
      {0, 3, 7, 4},  // -x
      {1, 5, 6, 2},  // +x
  };
  for (const auto& q : quads) {
    mesh.faces.push_back({base + q[0], base + q[1], base + q[2]});
    mesh.faces.push_back({base + q[0], base + q[2], base + q[3]});
  }
}

TriangleMesh make_chair_mesh(const ChairParams& p) {
  TriangleMesh mesh;
  const double hw = p.seat_width / 2.0;
  const double hd = p.seat_depth / 2.0;
  const double seat_bottom = p.seat_height - p.seat_thickness;

  // seat slab
  append_box(mesh, {-hw, -hd, seat_bottom}, {hw, hd, p.seat_height});

  // backrest slab along the -y edge
  append_box(mesh, {-hw, -hd, p.seat_height}, {hw, -hd + p.back_thickness,
                                               p.seat_height + p.back_height});

  if (p.pedestal) {
    const double stem = p.leg_thickness;
    append_box(mesh, {-stem / 2, -stem / 2, 0.0}, {stem / 2, stem / 2, seat_bottom});
    const double base_len = 0.85 * hw;
    const double base_h = 0.04;
    append_box(mesh, {-base_len, -stem / 2, 0.0}, {base_len, stem / 2, base_h});
    append_box(mesh, {-stem / 2, -base_len, 0.0}, {stem / 2, base_len, base_h});
  } else {
    const double t = p.leg_thickness;
    const double x0 = hw - t;
    const double y0 = hd - t;
    append_box(mesh, {-x0 - t / 2, -y0 - t / 2, 0.0}, {-x0 + t / 2, -y0 + t / 2, seat_bottom});
    append_box(mesh, {x0 - t / 2, -y0 - t / 2, 0.0}, {x0 + t / 2, -y0 + t / 2, seat_bottom});
    append_box(mesh, {-x0 - t / 2, y0 - t / 2, 0.0}, {-x0 + t / 2, y0 + t / 2, seat_bottom});
    append_box(mesh, {x0 - t / 2, y0 - t / 2, 0.0}, {x0 + t / 2, y0 + t / 2, seat_bottom});
  }

  if (p.arms) {
    const double top = p.seat_height + p.arm_height;
    // vertical arm panels on both sides, from the seat up
    append_box(mesh, {-hw - p.arm_thickness, -hd, p.seat_height}, {-hw, hd * 0.6, top});
    append_box(mesh, {hw, -hd, p.seat_height}, {hw + p.arm_thickness, hd * 0.6, top});
  }
  return mesh;
}

ChairParams random_chair_params(Rng& rng) {
  ChairParams p;
  p.seat_width = rng.uniform(0.40, 0.55);
  p.seat_depth = rng.uniform(0.40, 0.52);
  p.seat_height = rng.uniform(0.40, 0.50);
  p.seat_thickness = rng.uniform(0.04, 0.08);
  p.back_height = rng.uniform(0.35, 0.55);
  p.back_thickness = rng.uniform(0.03, 0.06);
  p.leg_thickness = rng.uniform(0.035, 0.06);
  p.pedestal = rng.uniform() < 0.3;
  p.arms = rng.uniform() < 0.35;
  p.arm_height = rng.uniform(0.18, 0.26);
  p.arm_thickness = rng.uniform(0.03, 0.05);
  return p;
}

std::vector<std::string> write_chair_family(const std::string& dir, int count,
                                            std::uint64_t seed) {
  if (count < 1) throw Error("write_chair_family: count must be positive");
  fs::create_directories(dir);
  Rng rng(seed);
  std::vector<std::string> names;
  names.reserve(count);
  for (int i = 0; i < count; ++i) {
    const ChairParams params = random_chair_params(rng);
    char name[32];
    std::snprintf(name, sizeof name, "chair_%02d.obj", i);
    save_mesh_obj(make_chair_mesh(params), (fs::path(dir) / name).string());
    names.emplace_back(name);
  }
  return names;
}

}  // namespace scomp
