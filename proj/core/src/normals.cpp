#include "scomp/normals.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "scomp/error.hpp"
#include "scomp/kdtree.hpp"

namespace scomp {

namespace {

Point3 oriented(const Point3& n) {
  if (n.z < 0.0) return -n;
  if (n.z == 0.0) {
    if (n.x < 0.0) return -n;
    if (n.x == 0.0 && n.y < 0.0) return -n;
  }
  return n;
}

bool coordinate_less(const Point3& a, const Point3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

PointCloud estimate_normals(const PointCloud& cloud, double radius) {
  if (!(radius > 0.0)) throw Error("estimate_normals: radius must be positive");
  if (cloud.size() < 3) throw Error("estimate_normals: need at least 3 points");

  const NeighborIndex index(cloud);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Point3{});

  std::vector<Point3> neighborhood;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::vector<std::size_t> nb = index.radius(cloud.points[i], radius);
    if (nb.size() < 3) continue;  // marker normal stays

    // accumulate in coordinate order so the estimate does not depend on the
    // input point order (near-degenerate neighborhoods are sensitive to the
    // covariance rounding)
    neighborhood.clear();
    for (std::size_t j : nb) neighborhood.push_back(cloud.points[j]);
    std::sort(neighborhood.begin(), neighborhood.end(), coordinate_less);

    Point3 mean;
    for (const Point3& p : neighborhood) mean += p;
    mean = mean / static_cast<double>(neighborhood.size());

    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
    for (const Point3& p : neighborhood) {
      const Point3 d = p - mean;
      xx += d.x * d.x;
      xy += d.x * d.y;
      xz += d.x * d.z;
      yy += d.y * d.y;
      yz += d.y * d.z;
      zz += d.z * d.z;
    }
    Eigen::Matrix3d cov;
    cov << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) continue;

    const auto v = solver.eigenvectors().col(0);  // smallest eigenvalue
    Point3 n{v[0], v[1], v[2]};
    const double len = n.norm();
    if (len == 0.0) continue;
    out.normals[i] = oriented(n / len);
  }
  return out;
}

}  // namespace scomp
