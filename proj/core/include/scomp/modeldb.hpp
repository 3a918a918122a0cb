#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scomp/geometry.hpp"
#include "scomp/registration.hpp"
#include "scomp/segmentation.hpp"

namespace scomp {

/// One synthetic model in canonical frame: ground contact at z = 0,
/// footprint (xy) centroid at the origin, exactly db_points points.
/// Coordinates are quantized to file precision so a saved and reloaded entry
/// is bit-identical to the in-memory one.
struct ModelEntry {
  std::string model_id;  // stable and sortable; relative mesh path by default
  std::uint8_t class_id = 0;
  PointCloud cloud;
  double lambda = 0.0;  // farthest point to centroid, meters
  double height = 0.0;  // z extent, meters
  std::string source;   // original mesh path
};

struct DatabaseParams {
  std::size_t surface_samples = 16384;  // dense area-weighted samples per mesh
  std::size_t db_points = 2048;         // farthest-point subsample kept per model
  std::uint64_t seed = 0;
};

struct ModelDatabase {
  std::vector<ModelEntry> entries;  // sorted by model_id
  DatabaseParams params;

  const ModelEntry* find(const std::string& model_id) const;
  std::vector<const ModelEntry*> of_class(std::uint8_t class_id) const;
  std::vector<std::uint8_t> classes() const;
};

/// Samples a mesh surface uniformly by area (seeded), subsamples by farthest
/// point to db_points, canonicalizes, and records lambda and height.
/// Errors on meshes with zero total area.
ModelEntry ingest_model(const std::string& mesh_path, std::uint8_t class_id,
                        std::size_t surface_samples, std::size_t db_points, std::uint64_t seed);

struct DatabaseBuildResult {
  ModelDatabase db;
  std::vector<std::pair<std::string, std::string>> failures;  // (path, reason)
};

/// One entry per readable mesh (*.obj, *.ply) under mesh_dir, model_id set to
/// the relative path. Per-file failures are collected; throws only when no
/// mesh succeeds.
DatabaseBuildResult build_database(const std::string& mesh_dir, std::uint8_t class_id,
                                   const DatabaseParams& params);

/// Layout: <dir>/manifest.json plus <dir>/models/<model_id>.ply. The manifest
/// records parameters, per-entry metadata and a content checksum per model.
void save_database(const ModelDatabase& db, const std::string& dir);

/// Errors name the offending file on a corrupt manifest, checksum mismatch,
/// wrong point count, or metadata inconsistent with the stored cloud.
ModelDatabase load_database(const std::string& dir);

struct MatchParams {
  RegistrationParams reg;
  int top_k = 5;
  int workers = 0;  // 0 = hardware concurrency; 1 = sequential reference path
  bool paper_coarse = false;  // coarse transform from one seeded random model, reused
  std::uint64_t seed = 0;     // drives the paper_coarse model choice
  double partial_leaf = 0.02; // voxel leaf for the partial before matching; 0 = off
};

/// Best database match for a partial view, Eq.-style argmin over the class.
struct MatchResult {
  int cluster_id = 0;
  std::uint8_t class_id = 0;
  std::string model_id;  // the argmin entry
  Alignment alignment;   // model canonical -> partial local frame
  GroundedTransform world_transform;  // model canonical -> world frame
  double delta = 0.0;
  std::vector<std::pair<std::string, double>> ranking;  // ascending (delta, model_id)
};

/// Runs coarse alignment, ICP refinement and the model distance for every
/// candidate of the cluster's class, picking the minimum delta (ties toward
/// the lowest model_id). Candidates are processed by a worker pool with a
/// deterministic reduction: parallel and sequential sweeps return identical
/// results. Errors when the database holds no model of the class.
MatchResult match(const Cluster& partial, const ModelDatabase& db, const MatchParams& params);

/// Line-delimited JSON match records (cluster_id, class_id, model_id, delta,
/// yaw, translation, scale, iterations, ranking).
void write_match_report(const std::vector<MatchResult>& results, const std::string& path);

/// Reads records back; world_transform, delta and ranking are restored
/// (residual histories are not serialized).
std::vector<MatchResult> read_match_report(const std::string& path);

}  // namespace scomp
