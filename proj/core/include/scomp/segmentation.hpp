#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scomp/geometry.hpp"

namespace scomp {

/// One object-instance candidate: the points of a single semantic class that
/// form a connected component under Euclidean single-linkage.
struct Cluster {
  PointCloud cloud;  // world frame, labels all equal to class_id
  std::uint8_t class_id = 0;
  int cluster_id = 0;
};

enum class FilterVerdict { kept, rejected_planar, rejected_size };

std::string to_string(FilterVerdict v);

struct FilterReport {
  int cluster_id = 0;
  FilterVerdict verdict = FilterVerdict::kept;
  double lambda = 0.0;                    // farthest point to centroid, meters
  std::array<double, 3> eigenvalues{};    // descending
};

struct SegmentationParams {
  double r_small = 0.05;        // small DoN radius, meters
  double r_large = 0.20;        // large DoN radius, meters
  double don_threshold = 0.25;  // keep points with |n_s - n_l|/2 >= threshold
  double cluster_gap = 0.05;    // single-linkage distance, meters
  std::size_t min_points = 100;
  double lambda_min = 0.10;  // size filter interval, meters
  double lambda_max = 0.25;
  double planarity_ratio = 0.01;  // reject when l3/l1 below this
  double planarity_abs = 1e-4;    // reject when l3 below this, m^2

  void validate() const;  // throws Error on inconsistent values
};

/// Extracts candidate clusters of the given class:
///   1. select points labeled class_id;
///   2. estimate normals at r_small and r_large over the selection;
///   3. keep points whose difference-of-normals magnitude |n_s - n_l|/2 is at
///      least don_threshold, or whose large-radius normal is the (0,0,0)
///      marker (so isolated thin structures are not discarded);
///   4. single-linkage clustering with distance cluster_gap;
///   5. drop clusters smaller than min_points.
/// Output is ordered by descending size, ties by the lowest original point
/// index; cluster_id numbers that order. Errors when labels are absent.
std::vector<Cluster> extract_instances(const PointCloud& semantic, std::uint8_t class_id,
                                       const SegmentationParams& params);

/// Rejects wall/floor label bleed: rejected_planar iff the smallest covariance
/// eigenvalue is under planarity_abs or under planarity_ratio * largest.
/// Requires >= 3 points.
FilterReport planarity_filter(const Cluster& cluster, const SegmentationParams& params);

/// Keeps clusters whose farthest-point distance lies in
/// [lambda_min, lambda_max] (inclusive).
FilterReport size_filter(const Cluster& cluster, const SegmentationParams& params);

/// Line-delimited JSON records (cluster_id, class_id, points, verdict, lambda,
/// eigenvalues).
void write_filter_report(const std::vector<std::pair<FilterReport, const Cluster*>>& rows,
                         const std::string& path);

struct FilterRecord {
  FilterReport report;
  std::uint8_t class_id = 0;
  std::size_t points = 0;
};

std::vector<FilterRecord> read_filter_report(const std::string& path);

}  // namespace scomp
