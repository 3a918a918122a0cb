#include "scomp/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <tuple>

#include "scomp/error.hpp"

namespace scomp {

void PointCloud::validate() const {
  if (has_normals() && normals.size() != points.size())
    throw Error("point cloud invariant: normals length mismatch");
  if (has_labels() && labels.size() != points.size())
    throw Error("point cloud invariant: labels length mismatch");
  for (const Point3& p : points)
    if (!p.finite()) throw Error("point cloud invariant: non-finite coordinate");
  for (const Point3& n : normals) {
    if (!n.finite()) throw Error("point cloud invariant: non-finite normal");
    if (n.zero()) continue;  // marker normal
    if (std::abs(n.norm() - 1.0) > 1e-6)
      throw Error("point cloud invariant: normal is not unit length");
  }
}

double normalized_yaw(double yaw) {
  double r = std::fmod(yaw, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fmod can land exactly on 2*pi after the add
  return r;
}

GroundedTransform GroundedTransform::inverse() const {
  GroundedTransform inv;
  inv.yaw = normalized_yaw(-yaw);
  inv.scale = 1.0 / scale;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  // -R_z(-yaw) * t / scale
  inv.translation = {-(c * translation.x + s * translation.y) / scale,
                     -(-s * translation.x + c * translation.y) / scale,
                     -translation.z / scale};
  return inv;
}

GroundedTransform compose(const GroundedTransform& outer, const GroundedTransform& inner) {
  GroundedTransform out;
  out.yaw = normalized_yaw(outer.yaw + inner.yaw);
  out.scale = outer.scale * inner.scale;
  out.translation = outer.apply(inner.translation);
  return out;
}

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("centroid: empty cloud");
  Point3 c;
  for (const Point3& p : cloud.points) c += p;
  return c / static_cast<double>(cloud.size());
}

CovarianceSummary covariance_summary(const PointCloud& cloud) {
  if (cloud.size() < 3) throw Error("covariance_summary: need at least 3 points");
  const Point3 c = centroid(cloud);
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (const Point3& p : cloud.points) {
    const Point3 d = p - c;
    xx += d.x * d.x;
    xy += d.x * d.y;
    xz += d.x * d.z;
    yy += d.y * d.y;
    yz += d.y * d.z;
    zz += d.z * d.z;
  }
  const double n = static_cast<double>(cloud.size());
  Eigen::Matrix3d cov;
  cov << xx / n, xy / n, xz / n, xy / n, yy / n, yz / n, xz / n, yz / n, zz / n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("covariance_summary: eigensolver failed");

  CovarianceSummary out;
  out.centroid = c;
  // Eigen sorts ascending; flip to descending and clamp numeric negatives.
  for (int i = 0; i < 3; ++i) {
    const int src = 2 - i;
    double ev = solver.eigenvalues()[src];
    if (ev < 0.0 && ev > -1e-12) ev = 0.0;
    out.eigenvalues[i] = ev;
    const auto v = solver.eigenvectors().col(src);
    out.eigenvectors[i] = {v[0], v[1], v[2]};
  }
  return out;
}

PointCloud apply_transform(const PointCloud& cloud, const GroundedTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) out.points.push_back(t.apply(p));
  out.labels = cloud.labels;
  out.normals.reserve(cloud.normals.size());
  for (const Point3& n : cloud.normals) {
    if (n.zero()) {
      out.normals.push_back(n);
      continue;
    }
    Point3 r = t.rotate(n);
    const double len = r.norm();
    out.normals.push_back(len > 0.0 ? r / len : Point3{});
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) throw Error("voxel_downsample: leaf must be positive");

  using Key = std::tuple<long long, long long, long long>;
  struct Bucket {
    Point3 point_sum{};
    Point3 normal_sum{};
    std::size_t count = 0;
    std::map<std::uint8_t, std::size_t> label_votes;
  };
  std::map<Key, Bucket> buckets;  // ordered: output follows lexicographic voxel coords

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    const Key key{static_cast<long long>(std::floor(p.x / leaf)),
                  static_cast<long long>(std::floor(p.y / leaf)),
                  static_cast<long long>(std::floor(p.z / leaf))};
    Bucket& b = buckets[key];
    b.point_sum += p;
    b.count += 1;
    if (cloud.has_normals()) b.normal_sum += cloud.normals[i];
    if (cloud.has_labels()) b.label_votes[cloud.labels[i]] += 1;
  }

  PointCloud out;
  out.points.reserve(buckets.size());
  for (const auto& [key, b] : buckets) {
    out.points.push_back(b.point_sum / static_cast<double>(b.count));
    if (cloud.has_normals()) {
      const double len = b.normal_sum.norm();
      out.normals.push_back(len > 0.0 ? b.normal_sum / len : Point3{});
    }
    if (cloud.has_labels()) {
      std::size_t best_votes = 0;
      std::uint8_t best_label = 0;
      for (const auto& [label, votes] : b.label_votes) {
        if (votes > best_votes) {  // map iterates ascending: ties keep the lowest id
          best_votes = votes;
          best_label = label;
        }
      }
      out.labels.push_back(best_label);
    }
  }
  return out;
}

double farthest_point_distance(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("farthest_point_distance: empty cloud");
  const Point3 c = centroid(cloud);
  double best = 0.0;
  for (const Point3& p : cloud.points) best = std::max(best, distance(p, c));
  return best;
}

}  // namespace scomp
