#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scomp/geometry.hpp"

namespace scomp {

/// Balanced k-d tree over an immutable point set. Queries return exactly what
/// exhaustive search would: exact nearest neighbors, with distance ties broken
/// by the lowest point index. Read-only queries are safe to run concurrently.
class NeighborIndex {
 public:
  explicit NeighborIndex(const PointCloud& cloud);

  struct Hit {
    std::size_t index = 0;
    double distance = 0.0;
  };

  /// Exact nearest neighbor of q (ties -> lowest index).
  Hit nearest(const Point3& q) const;

  /// Indices of all points with distance(q, p) <= radius, sorted ascending.
  std::vector<std::size_t> radius(const Point3& q, double radius) const;

  std::span<const Point3> points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    // Internal: axis in {0,1,2}, children indices. Leaf: axis == -1,
    // [begin, end) range into order_.
    int axis = -1;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  std::uint32_t build(std::uint32_t lo, std::uint32_t hi);
  void search_radius(std::uint32_t node, const Point3& q, double r2,
                     std::vector<std::size_t>& out) const;

  std::vector<Point3> pts_;     // original order, exposed via points()
  std::vector<Point3> sorted_;  // tree order, contiguous leaf scans
  std::vector<std::uint32_t> order_;  // tree position -> original index
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

/// Builds a NeighborIndex; errors on an empty cloud.
NeighborIndex build_index(const PointCloud& cloud);

}  // namespace scomp
