#pragma once

#include "scomp/geometry.hpp"

namespace scomp {

/// Per-point unit normals from the smallest-eigenvalue eigenvector of the
/// neighborhood covariance within radius. Orientation is made deterministic
/// by flipping to a non-negative z component (ties: non-negative x, then y).
/// Points with fewer than 3 neighbors in the ball (the point itself counts)
/// get the marker normal (0,0,0). Requires radius > 0 and >= 3 points.
PointCloud estimate_normals(const PointCloud& cloud, double radius);

}  // namespace scomp
