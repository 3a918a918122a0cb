#include "scomp/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "scomp/error.hpp"
#include "scomp/kdtree.hpp"
#include "scomp/rng.hpp"

namespace scomp {

using nlohmann::json;

void SceneSpec::validate() const {
  for (const Placement& p : placements)
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.yaw) ||
        !std::isfinite(p.scale) || !(p.scale > 0.0))
      throw Error("scene spec: non-finite or non-positive placement pose");
  if (noise_sigma < 0.0) throw Error("scene spec: negative noise_sigma");
  if (label_bleed < 0.0 || label_bleed > 1.0) throw Error("scene spec: label_bleed outside [0,1]");
  if (image_res < 8) throw Error("scene spec: image_res too small");
  if (!(clutter.spacing > 0.0)) throw Error("scene spec: clutter spacing must be positive");
}

namespace {

json point_to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

SceneSpec load_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  SceneSpec spec;
  try {
    for (const json& p : j.at("placements")) {
      Placement pl;
      pl.model_id = p.at("model_id").get<std::string>();
      pl.x = p.at("x").get<double>();
      pl.y = p.at("y").get<double>();
      pl.yaw = p.at("yaw").get<double>();
      pl.scale = p.value("scale", 1.0);
      spec.placements.push_back(std::move(pl));
    }
    if (j.contains("clutter")) {
      const json& c = j.at("clutter");
      if (c.contains("floor")) {
        FloorSpec f;
        f.x_min = c.at("floor").at("x_min").get<double>();
        f.x_max = c.at("floor").at("x_max").get<double>();
        f.y_min = c.at("floor").at("y_min").get<double>();
        f.y_max = c.at("floor").at("y_max").get<double>();
        spec.clutter.floor = f;
      }
      for (const json& w : c.value("walls", json::array())) {
        WallSpec wall;
        wall.x0 = w.at("x0").get<double>();
        wall.y0 = w.at("y0").get<double>();
        wall.x1 = w.at("x1").get<double>();
        wall.y1 = w.at("y1").get<double>();
        wall.height = w.at("height").get<double>();
        spec.clutter.walls.push_back(wall);
      }
      spec.clutter.spacing = c.value("spacing", 0.02);
    }
    for (const json& cam : j.at("cameras")) {
      CameraPose pose;
      pose.position = point_from_json(cam.at("position"));
      pose.look_at = point_from_json(cam.at("look_at"));
      spec.cameras.push_back(pose);
    }
    spec.image_res = j.value("image_res", 256);
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    spec.label_bleed = j.value("label_bleed", 0.0);
    spec.object_class = j.value("object_class", 1);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  spec.validate();
  return spec;
}

void save_scene_spec(const SceneSpec& spec, const std::string& path) {
  json j;
  j["placements"] = json::array();
  for (const Placement& p : spec.placements)
    j["placements"].push_back(
        {{"model_id", p.model_id}, {"x", p.x}, {"y", p.y}, {"yaw", p.yaw}, {"scale", p.scale}});
  json clutter;
  if (spec.clutter.floor) {
    const FloorSpec& f = *spec.clutter.floor;
    clutter["floor"] = {
        {"x_min", f.x_min}, {"x_max", f.x_max}, {"y_min", f.y_min}, {"y_max", f.y_max}};
  }
  clutter["walls"] = json::array();
  for (const WallSpec& w : spec.clutter.walls)
    clutter["walls"].push_back(
        {{"x0", w.x0}, {"y0", w.y0}, {"x1", w.x1}, {"y1", w.y1}, {"height", w.height}});
  clutter["spacing"] = spec.clutter.spacing;
  j["clutter"] = std::move(clutter);
  j["cameras"] = json::array();
  for (const CameraPose& cam : spec.cameras)
    j["cameras"].push_back(
        {{"position", point_to_json(cam.position)}, {"look_at", point_to_json(cam.look_at)}});
  j["image_res"] = spec.image_res;
  j["noise_sigma"] = spec.noise_sigma;
  j["label_bleed"] = spec.label_bleed;
  j["object_class"] = spec.object_class;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  GroundTruth truth;
  try {
    for (const json& e : j.at("entries")) {
      TruthEntry t;
      t.class_id = e.at("class_id").get<std::uint8_t>();
      t.centroid = point_from_json(e.at("centroid"));
      t.model_id = e.at("model_id").get<std::string>();
      t.pose.model_id = t.model_id;
      t.pose.x = e.at("pose").at("x").get<double>();
      t.pose.y = e.at("pose").at("y").get<double>();
      t.pose.yaw = e.at("pose").at("yaw").get<double>();
      t.pose.scale = e.at("pose").at("scale").get<double>();
      truth.entries.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return truth;
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
  json j;
  j["entries"] = json::array();
  for (const TruthEntry& t : truth.entries)
    j["entries"].push_back({{"class_id", t.class_id},
                            {"centroid", point_to_json(t.centroid)},
                            {"model_id", t.model_id},
                            {"pose",
                             {{"x", t.pose.x},
                              {"y", t.pose.y},
                              {"yaw", t.pose.yaw},
                              {"scale", t.pose.scale}}}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

namespace {

struct CameraFrame {
  Point3 position;
  Point3 forward, right, up;
};

CameraFrame camera_frame(const CameraPose& camera) {
  const Point3 dir = camera.look_at - camera.position;
  const double len = dir.norm();
  if (!(len > 0.0)) throw Error("render_partial: camera position equals look_at");
  CameraFrame f;
  f.position = camera.position;
  f.forward = dir / len;
  Point3 up_hint{0.0, 0.0, 1.0};
  if (std::abs(f.forward.dot(up_hint)) > 0.999) up_hint = {0.0, 1.0, 0.0};
  f.right = f.forward.cross(up_hint);
  f.right = f.right / f.right.norm();
  f.up = f.right.cross(f.forward);
  return f;
}

/// Z-buffered pinhole projection over tagged points. Returns indices of the
/// winning source point per covered pixel, in raster order.
std::vector<std::size_t> visible_points(const std::vector<Point3>& points,
                                        const CameraFrame& frame, int res) {
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> winner(static_cast<std::size_t>(res) * res, none);
  std::vector<double> depth(static_cast<std::size_t>(res) * res,
                            std::numeric_limits<double>::infinity());

  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point3 d = points[i] - frame.position;
    const double zc = d.dot(frame.forward);
    if (zc <= 1e-9) continue;
    const double u = d.dot(frame.right) / zc;
    const double v = d.dot(frame.up) / zc;
    if (u < -1.0 || u > 1.0 || v < -1.0 || v > 1.0) continue;  // 90 degree FoV
    int px = static_cast<int>((u + 1.0) * 0.5 * res);
    int py = static_cast<int>((v + 1.0) * 0.5 * res);
    px = std::min(px, res - 1);
    py = std::min(py, res - 1);
    const std::size_t cell = static_cast<std::size_t>(py) * res + px;
    if (zc < depth[cell] || (zc == depth[cell] && i < winner[cell])) {
      depth[cell] = zc;
      winner[cell] = i;
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t cell = 0; cell < winner.size(); ++cell)
    if (winner[cell] != none) out.push_back(winner[cell]);
  return out;
}

Point3 noisy_along_ray(const Point3& p, const Point3& camera, double sigma, Rng& rng) {
  if (sigma <= 0.0) return p;
  const Point3 d = p - camera;
  const double len = d.norm();
  if (!(len > 0.0)) return p;
  return p + d * (rng.normal(sigma) / len);
}

}  // namespace

PointCloud render_partial(const PointCloud& model, const CameraPose& camera, int image_res,
                          double noise_sigma, std::uint64_t seed) {
  if (model.empty()) throw Error("render_partial: empty cloud");
  if (image_res < 8) throw Error("render_partial: image_res too small");

  Point3 mn{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point3 mx = -1.0 * mn;
  for (const Point3& p : model.points) {
    mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
    mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
  }
  const Point3& c = camera.position;
  if (c.x >= mn.x && c.x <= mx.x && c.y >= mn.y && c.y <= mx.y && c.z >= mn.z && c.z <= mx.z)
    throw Error("render_partial: camera inside the cloud bounding box");

  const CameraFrame frame = camera_frame(camera);
  const std::vector<std::size_t> visible = visible_points(model.points, frame, image_res);
  if (visible.empty()) throw Error("render_partial: no points visible from the camera");

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(visible.size());
  for (std::size_t i : visible) {
    out.points.push_back(noisy_along_ray(model.points[i], frame.position, noise_sigma, rng));
    if (model.has_labels()) out.labels.push_back(model.labels[i]);
  }
  return out;
}

SceneResult synthesize_scene(const SceneSpec& spec, const ModelDatabase& db, std::uint64_t seed) {
  spec.validate();

  // world geometry: placed models (tag = placement index) and clutter (tag -1)
  std::vector<Point3> points;
  std::vector<int> tags;
  GroundTruth truth;
  PointCloud all_model_points;  // for the bleed candidate distance test

  for (std::size_t k = 0; k < spec.placements.size(); ++k) {
    const Placement& pl = spec.placements[k];
    const ModelEntry* entry = db.find(pl.model_id);
    if (!entry) throw Error("synthesize_scene: unknown model_id '" + pl.model_id + "'");
    GroundedTransform t;
    t.yaw = normalized_yaw(pl.yaw);
    t.scale = pl.scale;
    t.translation = {pl.x, pl.y, 0.0};
    const PointCloud placed = apply_transform(entry->cloud, t);

    TruthEntry te;
    te.class_id = entry->class_id;
    te.centroid = centroid(placed);
    te.model_id = pl.model_id;
    te.pose = pl;
    truth.entries.push_back(std::move(te));

    for (const Point3& p : placed.points) {
      points.push_back(p);
      tags.push_back(static_cast<int>(k));
      all_model_points.points.push_back(p);
    }
  }

  const double step = spec.clutter.spacing;
  if (spec.clutter.floor) {
    const FloorSpec& f = *spec.clutter.floor;
    for (double x = f.x_min; x <= f.x_max + 1e-12; x += step)
      for (double y = f.y_min; y <= f.y_max + 1e-12; y += step) {
        points.push_back({x, y, 0.0});
        tags.push_back(-1);
      }
  }
  for (const WallSpec& w : spec.clutter.walls) {
    const double dx = w.x1 - w.x0;
    const double dy = w.y1 - w.y0;
    const double len = std::sqrt(dx * dx + dy * dy);
    if (!(len > 0.0)) throw Error("synthesize_scene: wall with zero length");
    const int n_along = static_cast<int>(len / step) + 1;
    const int n_up = static_cast<int>(w.height / step) + 1;
    for (int i = 0; i <= n_along; ++i) {
      const double s = std::min(i * step / len, 1.0);
      for (int j = 0; j <= n_up; ++j) {
        const double z = std::min(j * step, w.height);
        points.push_back({w.x0 + s * dx, w.y0 + s * dy, z});
        tags.push_back(-1);
      }
    }
  }
  if (points.empty()) throw Error("synthesize_scene: nothing to render");

  // render the union per camera; objects and clutter occlude each other
  Rng base(seed);
  SceneResult result;
  for (std::size_t cam = 0; cam < spec.cameras.size(); ++cam) {
    const CameraFrame frame = camera_frame(spec.cameras[cam]);
    const std::vector<std::size_t> visible = visible_points(points, frame, spec.image_res);
    Rng cam_rng = base.derive(cam + 1);
    for (std::size_t i : visible) {
      result.geometric.points.push_back(
          noisy_along_ray(points[i], frame.position, spec.noise_sigma, cam_rng));
      result.semantic.labels.push_back(tags[i] >= 0 ? spec.object_class : 0);
    }
  }
  if (result.geometric.empty()) throw Error("synthesize_scene: no camera sees any geometry");
  result.semantic.points = result.geometric.points;

  // contiguous label bleed: clutter points near objects flip to the object
  // class in patches grown from near-boundary seeds, emulating a segmentation
  // mask spreading past the object silhouette
  if (spec.label_bleed > 0.0 && !all_model_points.empty()) {
    constexpr double kBleedRadius = 0.30;  // candidate band around objects, meters
    constexpr double kPatchRadius = 0.12;  // spread per bleed seed, meters

    const NeighborIndex model_index(all_model_points);
    struct Candidate {
      std::size_t point = 0;       // index into the semantic cloud
      double boundary_gap = 0.0;   // distance to the nearest object point
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < result.semantic.size(); ++i) {
      if (result.semantic.labels[i] != 0) continue;
      const double gap = model_index.nearest(result.semantic.points[i]).distance;
      if (gap <= kBleedRadius) candidates.push_back({i, gap});
    }
    if (!candidates.empty()) {
      std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.boundary_gap != b.boundary_gap) return a.boundary_gap < b.boundary_gap;
        return a.point < b.point;
      });
      PointCloud candidate_cloud;
      for (const Candidate& c : candidates)
        candidate_cloud.points.push_back(result.semantic.points[c.point]);
      const NeighborIndex candidate_index(candidate_cloud);

      const std::size_t target =
          static_cast<std::size_t>(std::lround(spec.label_bleed * candidates.size()));
      Rng bleed_rng = base.derive(0xb1eed);
      std::vector<bool> flipped(candidates.size(), false);
      std::size_t flipped_count = 0;
      std::size_t guard = 0;
      while (flipped_count < target && guard++ < 16 * candidates.size()) {
        // seeds come from the half of the band closest to the objects
        const std::size_t seed_slot = bleed_rng.uniform_index(candidates.size() / 2 + 1);
        if (flipped[seed_slot]) continue;
        for (std::size_t member :
             candidate_index.radius(candidate_cloud.points[seed_slot], kPatchRadius)) {
          if (flipped[member] || flipped_count >= target) continue;
          flipped[member] = true;
          ++flipped_count;
          result.semantic.labels[candidates[member].point] = spec.object_class;
        }
      }
    }
  }

  result.truth = truth;
  return result;
}

EvalReport report_from_counts(int tp, int fp, int fn) {
  if (tp < 0 || fp < 0 || fn < 0) throw Error("evaluate: negative counts");
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalReport evaluate(const ObjectLayer& detections, const GroundTruth& truth, double d_match) {
  if (!(d_match > 0.0)) throw Error("evaluate: d_match must be positive");

  struct Pair {
    double distance;
    int detection;
    int truth;
  };
  std::vector<Pair> pairs;
  for (std::size_t d = 0; d < detections.objects.size(); ++d) {
    if (detections.objects[d].cloud.empty()) continue;
    const Point3 det_centroid = centroid(detections.objects[d].cloud);
    const std::uint8_t det_class = detections.objects[d].match.class_id;
    for (std::size_t t = 0; t < truth.entries.size(); ++t) {
      if (truth.entries[t].class_id != det_class) continue;
      const double dist = distance(det_centroid, truth.entries[t].centroid);
      if (dist <= d_match) pairs.push_back({dist, static_cast<int>(d), static_cast<int>(t)});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.detection != b.detection) return a.detection < b.detection;
    return a.truth < b.truth;
  });

  std::vector<bool> det_used(detections.objects.size(), false);
  std::vector<bool> truth_used(truth.entries.size(), false);
  std::vector<Assignment> assignments;
  for (const Pair& p : pairs) {
    if (det_used[p.detection] || truth_used[p.truth]) continue;
    det_used[p.detection] = true;
    truth_used[p.truth] = true;
    assignments.push_back({p.detection, p.truth, p.distance});
  }

  const int tp = static_cast<int>(assignments.size());
  EvalReport report = report_from_counts(tp, static_cast<int>(detections.objects.size()) - tp,
                                         static_cast<int>(truth.entries.size()) - tp);
  report.assignments = std::move(assignments);
  return report;
}

void save_eval_report(const EvalReport& report, const std::string& path) {
  json j;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["assignments"] = json::array();
  for (const Assignment& a : report.assignments)
    j["assignments"].push_back(
        {{"detection", a.detection}, {"truth", a.truth}, {"distance", a.distance}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

void print_eval_report(const EvalReport& report, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%6s %6s %6s %10s %7s %6s\n", "tp", "fp", "fn", "precision",
                "recall", "f1");
  os << buf;
  std::snprintf(buf, sizeof buf, "%6d %6d %6d %10.2f %7.2f %6.2f\n", report.tp, report.fp,
                report.fn, report.precision, report.recall, report.f1);
  os << buf;
}

std::pair<double, double> completion_error(const PointCloud& placed,
                                           const PointCloud& truth_model) {
  if (placed.empty() || truth_model.empty()) throw Error("completion_error: empty cloud");

  const NeighborIndex truth_index(truth_model);
  double sum_fwd = 0.0;
  for (const Point3& p : placed.points) sum_fwd += truth_index.nearest(p).distance;
  const double directed = sum_fwd / static_cast<double>(placed.size());

  const NeighborIndex placed_index(placed);
  double sum_bwd = 0.0;
  for (const Point3& p : truth_model.points) sum_bwd += placed_index.nearest(p).distance;
  const double reverse = sum_bwd / static_cast<double>(truth_model.size());

  return {directed, 0.5 * (directed + reverse)};
}

}  // namespace scomp
