#include "scomp/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "scomp/error.hpp"

namespace scomp {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}

NeighborIndex::NeighborIndex(const PointCloud& cloud) : pts_(cloud.points) {
  if (pts_.empty()) throw Error("build_index: empty cloud");
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<std::uint32_t>(order_.size()));
  sorted_.resize(pts_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) sorted_[i] = pts_[order_[i]];
}

std::uint32_t NeighborIndex::build(std::uint32_t lo, std::uint32_t hi) {
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  if (hi - lo <= kLeafSize) {
    nodes_[id].begin = lo;
    nodes_[id].end = hi;
    return id;
  }

  // Split on the axis with the widest extent over this range.
  Point3 mn{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point3 mx{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  for (std::uint32_t i = lo; i < hi; ++i) {
    const Point3& p = pts_[order_[i]];
    mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
    mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
  }
  int axis = 0;
  double extent = mx.x - mn.x;
  if (mx.y - mn.y > extent) {
    axis = 1;
    extent = mx.y - mn.y;
  }
  if (mx.z - mn.z > extent) axis = 2;

  const std::uint32_t mid = lo + (hi - lo) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = pts_[a][axis];
                     const double cb = pts_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const double split = pts_[order_[mid]][axis];
  const std::uint32_t left = build(lo, mid);
  const std::uint32_t right = build(mid, hi);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

NeighborIndex::Hit NeighborIndex::nearest(const Point3& q) const {
  Hit best;
  best.index = pts_.size();
  best.distance = std::numeric_limits<double>::infinity();

  // iterative traversal; the stack holds deferred far sides with the plane
  // distance that was current when they were deferred
  struct Pending {
    std::uint32_t node;
    double plane_d2;
  };
  Pending stack[64];
  int top = 0;
  std::uint32_t node = root_;

  while (true) {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = squared_distance(q, sorted_[i]);
        const std::uint32_t idx = order_[i];
        if (d2 < best.distance || (d2 == best.distance && idx < best.index)) {
          best.distance = d2;
          best.index = idx;
        }
      }
      // pop the next pending far side that can still hold a winner; equal
      // distance must be visited so lower-index ties are found
      node = 0;
      bool found = false;
      while (top > 0) {
        const Pending p = stack[--top];
        if (p.plane_d2 <= best.distance) {
          node = p.node;
          found = true;
          break;
        }
      }
      if (!found) break;
      continue;
    }
    const double dq = q[n.axis] - n.split;
    const std::uint32_t near = dq < 0.0 ? n.left : n.right;
    const std::uint32_t far = dq < 0.0 ? n.right : n.left;
    const double plane_d2 = dq * dq;
    if (plane_d2 <= best.distance) stack[top++] = {far, plane_d2};
    node = near;
  }

  best.distance = std::sqrt(best.distance);
  return best;
}

std::vector<std::size_t> NeighborIndex::radius(const Point3& q, double r) const {
  if (!(r >= 0.0)) throw Error("radius search: negative radius");
  std::vector<std::size_t> out;
  search_radius(root_, q, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void NeighborIndex::search_radius(std::uint32_t node, const Point3& q, double r2,
                                  std::vector<std::size_t>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i)
      if (squared_distance(q, sorted_[i]) <= r2) out.push_back(order_[i]);
    return;
  }
  const double dq = q[n.axis] - n.split;
  const std::uint32_t near = dq < 0.0 ? n.left : n.right;
  const std::uint32_t far = dq < 0.0 ? n.right : n.left;
  search_radius(near, q, r2, out);
  if (dq * dq <= r2) search_radius(far, q, r2, out);
}

NeighborIndex build_index(const PointCloud& cloud) { return NeighborIndex(cloud); }

}  // namespace scomp
