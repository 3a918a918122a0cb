#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scomp/augmentation.hpp"
#include "scomp/geometry.hpp"
#include "scomp/modeldb.hpp"

namespace scomp {

struct CameraPose {
  Point3 position;
  Point3 look_at;
};

struct Placement {
  std::string model_id;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double scale = 1.0;
};

struct WallSpec {
  double x0 = 0.0, y0 = 0.0;  // segment endpoints on the floor
  double x1 = 0.0, y1 = 0.0;
  double height = 2.0;
};

struct FloorSpec {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

struct ClutterSpec {
  std::optional<FloorSpec> floor;
  std::vector<WallSpec> walls;
  double spacing = 0.02;  // lattice step for clutter sampling, meters
};

/// Declarative synthetic scene: model placements, clutter geometry, cameras,
/// and the corruption knobs (range noise and label bleed).
struct SceneSpec {
  std::vector<Placement> placements;
  ClutterSpec clutter;
  std::vector<CameraPose> cameras;
  int image_res = 256;
  double noise_sigma = 0.0;   // Gaussian range noise along the view ray, meters
  double label_bleed = 0.0;   // fraction of near-object clutter points mislabeled
  std::uint8_t object_class = 1;

  void validate() const;
};

SceneSpec load_scene_spec(const std::string& path);
void save_scene_spec(const SceneSpec& spec, const std::string& path);

struct TruthEntry {
  std::uint8_t class_id = 0;
  Point3 centroid;  // of the fully placed model, world frame
  std::string model_id;
  Placement pose;
};

struct GroundTruth {
  std::vector<TruthEntry> entries;
};

GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruth& truth, const std::string& path);

/// Single-cloud partial view: pinhole projection (square image, 90 degree
/// field of view) with per-pixel nearest-depth visibility, then seeded
/// Gaussian noise along each view ray. Output points come out in pixel raster
/// order. Errors when the camera sits inside the cloud's bounding box or when
/// nothing is visible.
PointCloud render_partial(const PointCloud& model, const CameraPose& camera, int image_res,
                          double noise_sigma, std::uint64_t seed);

struct SceneResult {
  PointCloud geometric;  // G: merged per-camera renderings, no labels
  PointCloud semantic;   // S: same points with labels (object class / background 0)
  GroundTruth truth;
};

/// Places every model, samples clutter lattices, renders the union from each
/// camera (objects occlude clutter and vice versa), merges in camera order,
/// and labels the result. label_bleed relabels contiguous clutter patches
/// near objects to the object class, emulating segmentation label spreading.
/// Deterministic in (spec, seed).
SceneResult synthesize_scene(const SceneSpec& spec, const ModelDatabase& db, std::uint64_t seed);

struct Assignment {
  int detection = 0;  // index into the object layer
  int truth = 0;      // index into the ground truth
  double distance = 0.0;
};

struct EvalReport {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<Assignment> assignments;
};

/// Greedy one-to-one matching of placed-model centroids to same-class truth
/// centroids by ascending distance; a pair within d_match counts as a true
/// positive. Unmatched detections are false positives, unmatched truths false
/// negatives. Zero denominators yield zero rates.
EvalReport evaluate(const ObjectLayer& detections, const GroundTruth& truth, double d_match);

/// Rates from already-counted detections (the arithmetic-only path).
EvalReport report_from_counts(int tp, int fp, int fn);

void save_eval_report(const EvalReport& report, const std::string& path);
void print_eval_report(const EvalReport& report, std::ostream& os);

/// Mean nearest-neighbor distance placed -> truth, and the symmetric
/// (chamfer-style) mean of both directions.
std::pair<double, double> completion_error(const PointCloud& placed,
                                           const PointCloud& truth_model);

}  // namespace scomp
