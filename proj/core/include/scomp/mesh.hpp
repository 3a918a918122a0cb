#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scomp/geometry.hpp"
#include "scomp/rng.hpp"

namespace scomp {

/// Triangle soup; faces index into vertices.
struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

/// Reads an OBJ or PLY mesh; polygon faces are fan-triangulated.
TriangleMesh load_mesh(const std::string& path);

void save_mesh_obj(const TriangleMesh& mesh, const std::string& path);

double surface_area(const TriangleMesh& mesh);

/// Area-weighted uniform surface sampling; deterministic for a given rng.
/// Errors when the mesh has zero total area.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, Rng& rng);

/// Farthest-point subsampling down to count points. The first kept point is
/// drawn from rng; later picks maximize the distance to the kept set, ties by
/// lowest index. Returns a copy when count >= cloud size.
PointCloud farthest_point_subsample(const PointCloud& cloud, std::size_t count, Rng& rng);

}  // namespace scomp
