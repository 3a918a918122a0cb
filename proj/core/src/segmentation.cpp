#include "scomp/segmentation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "scomp/error.hpp"
#include "scomp/kdtree.hpp"
#include "scomp/normals.hpp"

namespace scomp {

using nlohmann::json;

std::string to_string(FilterVerdict v) {
  switch (v) {
    case FilterVerdict::kept:
      return "kept";
    case FilterVerdict::rejected_planar:
      return "rejected_planar";
    case FilterVerdict::rejected_size:
      return "rejected_size";
  }
  return "unknown";
}

void SegmentationParams::validate() const {
  if (!(r_small > 0.0) || !(r_large > 0.0) || r_small >= r_large)
    throw Error("segmentation params: need 0 < r_small < r_large");
  if (don_threshold < 0.0 || don_threshold > 1.0)
    throw Error("segmentation params: don_threshold outside [0,1]");
  if (!(cluster_gap > 0.0)) throw Error("segmentation params: cluster_gap must be positive");
  if (!(lambda_min > 0.0) || lambda_min >= lambda_max)
    throw Error("segmentation params: need 0 < lambda_min < lambda_max");
  if (!(planarity_ratio > 0.0) || !(planarity_abs > 0.0))
    throw Error("segmentation params: planarity thresholds must be positive");
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b)
      parent[b] = a;
    else
      parent[a] = b;
  }
};

}  // namespace

std::vector<Cluster> extract_instances(const PointCloud& semantic, std::uint8_t class_id,
                                       const SegmentationParams& params) {
  params.validate();
  if (!semantic.has_labels()) throw Error("extract_instances: cloud has no labels");

  // 1. class selection, keeping original indices for the ordering rule
  PointCloud selected;
  std::vector<std::size_t> original_index;
  for (std::size_t i = 0; i < semantic.size(); ++i) {
    if (semantic.labels[i] != class_id) continue;
    selected.points.push_back(semantic.points[i]);
    original_index.push_back(i);
  }
  if (selected.empty()) return {};

  // 2.-3. difference of normals over the selected points
  std::vector<std::size_t> kept;  // indices into `selected`
  if (selected.size() < 3) {
    // too small for normal estimation; fall through to clustering as-is
    kept.resize(selected.size());
    std::iota(kept.begin(), kept.end(), 0u);
  } else {
    const PointCloud with_small = estimate_normals(selected, params.r_small);
    const PointCloud with_large = estimate_normals(selected, params.r_large);
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const Point3& ns = with_small.normals[i];
      const Point3& nl = with_large.normals[i];
      const double don = 0.5 * (ns - nl).norm();
      if (don >= params.don_threshold || nl.zero()) kept.push_back(i);
    }
  }
  if (kept.empty()) return {};

  // 4. single-linkage clustering at cluster_gap
  PointCloud kept_cloud;
  kept_cloud.points.reserve(kept.size());
  for (std::size_t i : kept) kept_cloud.points.push_back(selected.points[i]);
  const NeighborIndex index(kept_cloud);

  UnionFind uf(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j : index.radius(kept_cloud.points[i], params.cluster_gap)) uf.merge(i, j);

  std::vector<std::vector<std::size_t>> groups;  // member lists, by root discovery order
  {
    std::vector<int> root_slot(kept.size(), -1);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const std::size_t root = uf.find(i);
      if (root_slot[root] < 0) {
        root_slot[root] = static_cast<int>(groups.size());
        groups.emplace_back();
      }
      groups[root_slot[root]].push_back(i);
    }
  }

  // 5. size floor, then deterministic ordering: descending size, then lowest
  // original point index
  std::vector<std::size_t> group_order;
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].size() >= params.min_points) group_order.push_back(g);
  std::sort(group_order.begin(), group_order.end(), [&](std::size_t a, std::size_t b) {
    if (groups[a].size() != groups[b].size()) return groups[a].size() > groups[b].size();
    return original_index[kept[groups[a].front()]] < original_index[kept[groups[b].front()]];
  });

  std::vector<Cluster> out;
  out.reserve(group_order.size());
  for (std::size_t rank = 0; rank < group_order.size(); ++rank) {
    const std::vector<std::size_t>& members = groups[group_order[rank]];
    Cluster c;
    c.cluster_id = static_cast<int>(rank);
    c.class_id = class_id;
    c.cloud.points.reserve(members.size());
    for (std::size_t m : members) c.cloud.points.push_back(kept_cloud.points[m]);
    c.cloud.labels.assign(members.size(), class_id);
    out.push_back(std::move(c));
  }
  return out;
}

FilterReport planarity_filter(const Cluster& cluster, const SegmentationParams& params) {
  if (cluster.cloud.size() < 3) throw Error("planarity_filter: cluster has fewer than 3 points");
  const CovarianceSummary cov = covariance_summary(cluster.cloud);

  FilterReport report;
  report.cluster_id = cluster.cluster_id;
  report.lambda = farthest_point_distance(cluster.cloud);
  report.eigenvalues = cov.eigenvalues;

  const double l1 = cov.eigenvalues[0];
  const double l3 = cov.eigenvalues[2];
  const bool planar = l3 < params.planarity_abs || (l1 > 0.0 && l3 / l1 < params.planarity_ratio);
  report.verdict = planar ? FilterVerdict::rejected_planar : FilterVerdict::kept;
  return report;
}

FilterReport size_filter(const Cluster& cluster, const SegmentationParams& params) {
  if (cluster.cloud.empty()) throw Error("size_filter: empty cluster");

  FilterReport report;
  report.cluster_id = cluster.cluster_id;
  report.lambda = farthest_point_distance(cluster.cloud);
  if (cluster.cloud.size() >= 3) report.eigenvalues = covariance_summary(cluster.cloud).eigenvalues;
  const bool inside = report.lambda >= params.lambda_min && report.lambda <= params.lambda_max;
  report.verdict = inside ? FilterVerdict::kept : FilterVerdict::rejected_size;
  return report;
}

void write_filter_report(const std::vector<std::pair<FilterReport, const Cluster*>>& rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const auto& [report, cluster] : rows) {
    json j;
    j["cluster_id"] = report.cluster_id;
    j["class_id"] = cluster ? cluster->class_id : 0;
    j["points"] = cluster ? cluster->cloud.size() : 0;
    j["verdict"] = to_string(report.verdict);
    j["lambda"] = report.lambda;
    j["eigenvalues"] = report.eigenvalues;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<FilterRecord> read_filter_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<FilterRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    FilterRecord rec;
    rec.report.cluster_id = j.at("cluster_id").get<int>();
    rec.class_id = j.at("class_id").get<std::uint8_t>();
    rec.points = j.at("points").get<std::size_t>();
    const std::string verdict = j.at("verdict").get<std::string>();
    if (verdict == "kept")
      rec.report.verdict = FilterVerdict::kept;
    else if (verdict == "rejected_planar")
      rec.report.verdict = FilterVerdict::rejected_planar;
    else if (verdict == "rejected_size")
      rec.report.verdict = FilterVerdict::rejected_size;
    else
      throw ParseError(path + ":" + std::to_string(line_no) + ": unknown verdict '" + verdict +
                       "'");
    rec.report.lambda = j.at("lambda").get<double>();
    const auto eig = j.at("eigenvalues");
    for (int i = 0; i < 3; ++i) rec.report.eigenvalues[i] = eig.at(i).get<double>();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace scomp
