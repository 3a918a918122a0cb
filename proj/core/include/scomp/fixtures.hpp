#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scomp/mesh.hpp"
#include "scomp/rng.hpp"

namespace scomp {

/// Procedural box-built chair, canonical pose: footprint centered near the
/// origin, ground contact at z = 0, backrest on the -y side (facing +y).
struct ChairParams {
  double seat_width = 0.45;
  double seat_depth = 0.45;
  double seat_height = 0.44;
  double seat_thickness = 0.05;
  double back_height = 0.42;
  double back_thickness = 0.04;
  double leg_thickness = 0.045;
  bool pedestal = false;  // central stem on a cross base instead of four legs
  bool arms = false;
  double arm_height = 0.22;
  double arm_thickness = 0.04;
};

TriangleMesh make_chair_mesh(const ChairParams& params);

/// Plausible office/home chair variation for fixture databases.
ChairParams random_chair_params(Rng& rng);

/// Writes `count` procedurally varied chair meshes to dir as chair_00.obj,
/// chair_01.obj, ...; returns the file names in order.
std::vector<std::string> write_chair_family(const std::string& dir, int count,
                                            std::uint64_t seed);

/// Axis-aligned box appended to a mesh as 12 triangles.
void append_box(TriangleMesh& mesh, const Point3& lo, const Point3& hi);

}  // namespace scomp
