#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace scomp {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3() = default;
  Point3(double px, double py, double pz) : x(px), y(py), z(pz) {}

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Point3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Point3 operator-() const { return {-x, -y, -z}; }
  Point3& operator+=(const Point3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Point3& operator-=(const Point3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  bool operator==(const Point3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  Point3 cross(const Point3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
  bool zero() const { return x == 0.0 && y == 0.0 && z == 0.0; }
  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline Point3 operator*(double s, const Point3& p) { return p * s; }
inline double squared_distance(const Point3& a, const Point3& b) { return (a - b).squared_norm(); }
inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

/// Point set with optional per-point attributes. The optional vectors are
/// either empty or have exactly points.size() entries. Normals are unit
/// vectors; (0,0,0) marks "no estimate" for degenerate neighborhoods.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<Point3> normals;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws Error when a structural invariant is broken (attribute length
  /// mismatch, non-finite coordinates, non-unit normals).
  void validate() const;
};

/// Maps yaw into [0, 2*pi).
double normalized_yaw(double yaw);

/// Yaw-about-z rotation with uniform scale and 3D translation:
///   p :-> R_z(yaw) * (scale * p) + translation
struct GroundedTransform {
  double yaw = 0.0;  // radians in [0, 2*pi)
  Point3 translation{};
  double scale = 1.0;  // strictly positive

  Point3 apply(const Point3& p) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double sx = scale * p.x;
    const double sy = scale * p.y;
    return {c * sx - s * sy + translation.x, s * sx + c * sy + translation.y,
            scale * p.z + translation.z};
  }

  /// Rotates a direction vector (no scale, no translation).
  Point3 rotate(const Point3& n) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * n.x - s * n.y, s * n.x + c * n.y, n.z};
  }

  GroundedTransform inverse() const;
  static GroundedTransform identity() { return {}; }
};

/// Composition outer after inner: result.apply(p) == outer.apply(inner.apply(p)).
GroundedTransform compose(const GroundedTransform& outer, const GroundedTransform& inner);

/// Centroid plus eigen-decomposed population covariance (divide by N).
/// Eigenvalues sorted descending; eigenvectors[i] pairs with eigenvalues[i].
struct CovarianceSummary {
  Point3 centroid;
  std::array<double, 3> eigenvalues{};
  std::array<Point3, 3> eigenvectors{};
};

Point3 centroid(const PointCloud& cloud);

/// Requires >= 3 points.
CovarianceSummary covariance_summary(const PointCloud& cloud);

/// Applies T to every point; normals are rotated (not scaled) and kept unit.
PointCloud apply_transform(const PointCloud& cloud, const GroundedTransform& t);

/// One representative point per occupied voxel (the centroid of its points).
/// Voxel of p is floor(p/leaf) per axis; output ordered by lexicographic voxel
/// coordinate. Labels resolve to the voxel majority, ties to the lowest id.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

/// Max Euclidean distance from any point to the cloud centroid.
double farthest_point_distance(const PointCloud& cloud);

}  // namespace scomp
