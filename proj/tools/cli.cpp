#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scomp/augmentation.hpp"
#include "scomp/cloud_io.hpp"
#include "scomp/config.hpp"
#include "scomp/costmap.hpp"
#include "scomp/error.hpp"
#include "scomp/evalkit.hpp"
#include "scomp/fixtures.hpp"
#include "scomp/modeldb.hpp"
#include "scomp/segmentation.hpp"

namespace scomp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Pipeline flags shared across subcommands. Values land in the members; the
/// CLI11 option handles tell us which were actually given, so the precedence
/// is defaults < config file < explicit flags.
struct PipelineFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  int class_id = 1;
  double epsilon = 0.1;
  double lambda_min = 0.1;
  double lambda_max = 0.25;
  double zmin = 0.1;
  double zmax = 1.0;
  double resolution = 0.05;
  double padding = 0.25;
  int yaw_samples = 36;
  bool paper_coarse = false;
  std::string grounding = "partial";
  int top_k = 5;
  double partial_leaf = 0.02;
  int min_points = 100;
  double cluster_gap = 0.05;
  double d_match = 0.5;
  int db_points = 2048;
  int surface_samples = 16384;

  // a flag can be registered on several subcommands; only the subcommand
  // that actually parsed can have a nonzero count
  std::map<std::string, std::vector<CLI::Option*>> given;

  void track(const std::string& name, CLI::Option* option) { given[name].push_back(option); }

  void add_config(CLI::App* cmd) {
    track("config", cmd->add_option("--config", config_path, "key = value configuration file"));
  }
  void add_seed(CLI::App* cmd) {
    track("seed", cmd->add_option("--seed", seed, "seed for stochastic steps"));
  }
  void add_workers(CLI::App* cmd) {
    track("workers", cmd->add_option("--workers", workers,
                                     "worker threads (1 = sequential reference path, 0 = auto)"));
  }
  void add_class(CLI::App* cmd) {
    track("class", cmd->add_option("--class", class_id, "semantic class id"));
  }
  void add_segment(CLI::App* cmd) {
    track("lambda-min",
          cmd->add_option("--lambda-min", lambda_min, "size filter lower bound, meters"));
    track("lambda-max",
          cmd->add_option("--lambda-max", lambda_max, "size filter upper bound, meters"));
    track("min-points", cmd->add_option("--min-points", min_points, "minimum cluster size"));
    track("cluster-gap",
          cmd->add_option("--cluster-gap", cluster_gap, "clustering linkage distance, meters"));
  }
  void add_match(CLI::App* cmd) {
    track("yaw-samples", cmd->add_option("--yaw-samples", yaw_samples,
                                         "uniform yaw samples for coarse alignment"));
    track("paper-coarse",
          cmd->add_flag("--paper-coarse", paper_coarse,
                        "coarse transform from one seeded random model, reused for all candidates"));
    track("grounding", cmd->add_option("--grounding", grounding, "partial|floor")
                           ->check(CLI::IsMember({"partial", "floor"})));
    track("top-k", cmd->add_option("--top-k", top_k, "ranking entries kept in the report"));
    track("partial-leaf",
          cmd->add_option("--partial-leaf", partial_leaf,
                          "voxel leaf for partials before matching (0 = off)"));
  }
  void add_epsilon(CLI::App* cmd) {
    track("epsilon", cmd->add_option("--epsilon", epsilon, "scene-point removal radius, meters"));
  }
  void add_costmap(CLI::App* cmd) {
    track("zmin", cmd->add_option("--zmin", zmin, "projection lower z bound, meters"));
    track("zmax", cmd->add_option("--zmax", zmax, "projection upper z bound (robot height)"));
    track("resolution",
          cmd->add_option("--resolution", resolution, "costmap cell size, meters"));
    track("padding", cmd->add_option("--padding", padding, "free border, meters"));
  }
  void add_database(CLI::App* cmd) {
    track("db-points", cmd->add_option("--db-points", db_points, "points kept per model"));
    track("surface-samples",
          cmd->add_option("--surface-samples", surface_samples, "dense samples per mesh"));
  }
  void add_eval(CLI::App* cmd) {
    track("d-match", cmd->add_option("--d-match", d_match, "true-positive centroid distance"));
  }

  bool has(const std::string& name) const {
    const auto it = given.find(name);
    if (it == given.end()) return false;
    for (const CLI::Option* option : it->second)
      if (option->count() > 0) return true;
    return false;
  }

  PipelineConfig build() const {
    PipelineConfig c;
    if (!config_path.empty()) c = PipelineConfig::load(config_path);
    if (has("seed")) c.seed = seed;
    if (has("workers")) c.workers = workers;
    if (has("class")) c.class_id = static_cast<std::uint8_t>(class_id);
    if (has("epsilon")) c.epsilon = epsilon;
    if (has("lambda-min")) c.segmentation.lambda_min = lambda_min;
    if (has("lambda-max")) c.segmentation.lambda_max = lambda_max;
    if (has("min-points")) c.segmentation.min_points = static_cast<std::size_t>(min_points);
    if (has("cluster-gap")) c.segmentation.cluster_gap = cluster_gap;
    if (has("yaw-samples")) c.registration.yaw_samples = yaw_samples;
    if (has("paper-coarse")) c.paper_coarse = paper_coarse;
    if (has("grounding"))
      c.registration.grounding =
          grounding == "floor" ? Grounding::floor : Grounding::partial_extent;
    if (has("top-k")) c.top_k = top_k;
    if (has("partial-leaf")) c.partial_leaf = partial_leaf;
    if (has("zmin")) c.costmap.z_min = zmin;
    if (has("zmax")) c.costmap.z_max = zmax;
    if (has("resolution")) c.costmap.resolution = resolution;
    if (has("padding")) c.costmap.padding = padding;
    if (has("d-match")) c.d_match = d_match;
    if (has("db-points")) c.database.db_points = static_cast<std::size_t>(db_points);
    if (has("surface-samples"))
      c.database.surface_samples = static_cast<std::size_t>(surface_samples);
    c.database.seed = c.seed;
    return c;
  }
};

void print_effective_config(const PipelineConfig& config) {
  std::cout << "# effective configuration\n";
  config.print(std::cout);
  std::cout << std::flush;
}

std::string cluster_file_name(int cluster_id, std::uint8_t class_id) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "cluster_%04d_%d.ply", cluster_id, int(class_id));
  return buf;
}

/// Combined per-cluster verdict: planarity rejection wins over size rejection.
FilterReport run_filters(const Cluster& cluster, const SegmentationParams& params) {
  const FilterReport planarity = planarity_filter(cluster, params);
  if (planarity.verdict != FilterVerdict::kept) return planarity;
  return size_filter(cluster, params);
}

struct SegmentOutput {
  std::vector<Cluster> clusters;
  std::vector<FilterReport> reports;  // aligned with clusters
};

SegmentOutput segment_scene(const PointCloud& semantic, const PipelineConfig& config) {
  SegmentOutput out;
  out.clusters = extract_instances(semantic, config.class_id, config.segmentation);
  out.reports.reserve(out.clusters.size());
  for (const Cluster& cluster : out.clusters)
    out.reports.push_back(run_filters(cluster, config.segmentation));
  return out;
}

void write_segment_artifacts(const SegmentOutput& seg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::pair<FilterReport, const Cluster*>> rows;
  for (std::size_t i = 0; i < seg.clusters.size(); ++i) {
    const Cluster& cluster = seg.clusters[i];
    save_cloud(cluster.cloud,
               (fs::path(out_dir) / cluster_file_name(cluster.cluster_id, cluster.class_id))
                   .string());
    rows.emplace_back(seg.reports[i], &cluster);
  }
  write_filter_report(rows, (fs::path(out_dir) / "filter_report.jsonl").string());
}

std::vector<MatchResult> match_clusters(const std::vector<Cluster>& clusters,
                                        const std::vector<FilterReport>& reports,
                                        const ModelDatabase& db, const PipelineConfig& config) {
  std::vector<MatchResult> results;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (reports[i].verdict != FilterVerdict::kept) continue;
    results.push_back(match(clusters[i], db, config.match_params()));
  }
  return results;
}

void write_match_artifacts(const std::vector<MatchResult>& results, const ModelDatabase& db,
                           const PipelineConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ObjectLayer layer = build_object_layer(results, db, config.registration.grounding);
  std::vector<MatchResult> grounded;
  grounded.reserve(layer.objects.size());
  for (const PlacedObject& obj : layer.objects) grounded.push_back(obj.match);
  write_match_report(grounded, (fs::path(out_dir) / "match_report.jsonl").string());
  save_object_layer(layer, (fs::path(out_dir) / "objects").string());
}

// ---- subcommand handlers ----

int cmd_db_build(const PipelineFlags& flags, const std::string& meshes, const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  DatabaseParams params = config.database;
  params.seed = config.seed;
  const DatabaseBuildResult result = build_database(meshes, config.class_id, params);
  save_database(result.db, out);

  std::cout << "database: " << result.db.entries.size() << " models -> " << out << "\n";
  for (const auto& [path, reason] : result.failures)
    std::cout << "skipped " << path << ": " << reason << "\n";
  return kExitOk;
}

int cmd_db_synth(const PipelineFlags& flags, const std::string& out, int count) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);
  const std::vector<std::string> names = write_chair_family(out, count, config.seed);
  std::cout << "wrote " << names.size() << " meshes to " << out << "\n";
  return kExitOk;
}

int cmd_segment(const PipelineFlags& flags, const std::string& scene, const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const PointCloud semantic = load_cloud(scene);
  const SegmentOutput seg = segment_scene(semantic, config);
  write_segment_artifacts(seg, out);

  std::size_t kept = 0;
  for (const FilterReport& r : seg.reports)
    if (r.verdict == FilterVerdict::kept) ++kept;
  std::cout << "clusters: " << seg.clusters.size() << " extracted, " << kept << " kept -> " << out
            << "\n";
  return kExitOk;
}

int cmd_match(const PipelineFlags& flags, const std::string& db_dir, const std::string& clusters,
              const std::string& cluster_file, std::string out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const ModelDatabase db = load_database(db_dir);

  std::vector<Cluster> cluster_list;
  std::vector<FilterReport> reports;
  if (!cluster_file.empty()) {
    Cluster c;
    c.cloud = load_cloud(cluster_file);
    c.cluster_id = 0;
    c.class_id = config.class_id;
    if (c.cloud.has_labels()) c.class_id = c.cloud.labels.front();
    if (out.empty()) out = fs::path(cluster_file).parent_path().string();
    cluster_list.push_back(std::move(c));
    FilterReport keep_all;
    keep_all.verdict = FilterVerdict::kept;
    reports.push_back(keep_all);
  } else {
    const std::string report_path = (fs::path(clusters) / "filter_report.jsonl").string();
    for (const FilterRecord& rec : read_filter_report(report_path)) {
      Cluster c;
      c.cluster_id = rec.report.cluster_id;
      c.class_id = rec.class_id;
      c.cloud =
          load_cloud((fs::path(clusters) / cluster_file_name(c.cluster_id, c.class_id)).string());
      cluster_list.push_back(std::move(c));
      reports.push_back(rec.report);
    }
    if (out.empty()) out = clusters;
  }
  if (out.empty()) out = ".";

  const std::vector<MatchResult> results = match_clusters(cluster_list, reports, db, config);
  write_match_artifacts(results, db, config, out);
  std::cout << "matched " << results.size() << " clusters -> " << out << "\n";
  return kExitOk;
}

int cmd_complete(const PipelineFlags& flags, const std::string& scene, const std::string& db_dir,
                 const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const ModelDatabase db = load_database(db_dir);
  const PointCloud semantic = load_cloud(scene);

  const SegmentOutput seg = segment_scene(semantic, config);
  write_segment_artifacts(seg, out);

  const std::vector<MatchResult> results = match_clusters(seg.clusters, seg.reports, db, config);
  write_match_artifacts(results, db, config, out);

  std::cout << "complete: " << seg.clusters.size() << " clusters, " << results.size()
            << " objects -> " << out << "\n";
  return kExitOk;
}

int cmd_augment(const PipelineFlags& flags, const std::string& scene, const std::string& objects,
                const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const PointCloud g = load_cloud(scene);
  const ObjectLayer layer = load_object_layer(objects);
  const AugmentedScene augmented = augment_scene(g, layer, config.epsilon);
  save_augmented(augmented, out);

  const std::size_t removed = g.size() - std::count(augmented.provenance.begin(),
                                                    augmented.provenance.end(), std::uint16_t{0});
  std::cout << "augmented: " << g.size() << " scene points, " << removed << " superseded, "
            << augmented.cloud.size() << " total -> " << out << "\n";
  return kExitOk;
}

int cmd_costmap(const PipelineFlags& flags, const std::string& objects, const std::string& out,
                const std::string& merge_yaml) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const ObjectLayer layer = load_object_layer(objects);
  OccupancyGrid grid = project_objects(layer, config.costmap);
  if (!merge_yaml.empty()) grid = merge_grids(load_grid(merge_yaml), grid);
  save_grid(grid, out);

  std::cout << "costmap: " << grid.width << "x" << grid.height << " cells -> " << out
            << ".pgm/.yaml\n";
  return kExitOk;
}

int cmd_scene(const PipelineFlags& flags, const std::string& spec_path, const std::string& db_dir,
              const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const SceneSpec spec = load_scene_spec(spec_path);
  const ModelDatabase db = load_database(db_dir);
  const SceneResult scene = synthesize_scene(spec, db, config.seed);

  fs::create_directories(out);
  save_cloud(scene.geometric, (fs::path(out) / "geometric.ply").string());
  save_cloud(scene.semantic, (fs::path(out) / "semantic.ply").string());
  save_ground_truth(scene.truth, (fs::path(out) / "truth.json").string());

  std::cout << "scene: " << scene.geometric.size() << " points, " << scene.truth.entries.size()
            << " objects -> " << out << "\n";
  return kExitOk;
}

int cmd_scan(const PipelineFlags& flags, const std::string& model_path,
             const std::vector<double>& camera, const std::string& out, int image_res,
             double noise_sigma) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  const PointCloud model = load_cloud(model_path);
  CameraPose pose;
  pose.position = {camera[0], camera[1], camera[2]};
  pose.look_at = {camera[3], camera[4], camera[5]};
  const PointCloud partial = render_partial(model, pose, image_res, noise_sigma, config.seed);
  save_cloud(partial, out);

  std::cout << "scan: " << partial.size() << " of " << model.size() << " points visible -> "
            << out << "\n";
  return kExitOk;
}

int cmd_eval(const PipelineFlags& flags, const std::string& counts_path,
             const std::string& truth_path, const std::string& objects,
             const std::string& matches_path, const std::string& out) {
  const PipelineConfig config = flags.build();
  print_effective_config(config);

  EvalReport report;
  if (!counts_path.empty()) {
    std::ifstream in(counts_path);
    if (!in) throw IoError("cannot open '" + counts_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ParseError(counts_path + ": " + e.what());
    }
    report = report_from_counts(j.at("tp").get<int>(), j.at("fp").get<int>(),
                                j.at("fn").get<int>());
  } else {
    if (truth_path.empty() || objects.empty())
      throw Error("eval needs either --counts or both --truth and --objects");
    const GroundTruth truth = load_ground_truth(truth_path);
    ObjectLayer layer;
    if (!matches_path.empty()) {
      const std::vector<MatchResult> matches = read_match_report(matches_path);
      layer = load_object_layer(objects, &matches);
    } else {
      layer = load_object_layer(objects);
    }
    report = evaluate(layer, truth, config.d_match);
  }

  print_eval_report(report, std::cout);
  if (!out.empty()) save_eval_report(report, out);
  return kExitOk;
}

}  // namespace

int run_command(std::vector<std::string> args) {
  CLI::App app{"scene completion toolkit: instance extraction, model matching,"
               " scene augmentation and costmaps for labeled indoor point clouds"};
  app.name("scomp");
  app.require_subcommand(0, 1);

  PipelineFlags flags;

  // db build / db synth
  CLI::App* db = app.add_subcommand("db", "model database construction");
  db->require_subcommand(1);
  CLI::App* db_build = db->add_subcommand("build", "ingest a mesh directory into a database");
  std::string meshes_dir, out_path;
  db_build->add_option("--meshes", meshes_dir, "directory of OBJ/PLY meshes")->required();
  db_build->add_option("--out", out_path, "database output directory")->required();
  flags.add_config(db_build);
  flags.add_seed(db_build);
  flags.add_class(db_build);
  flags.add_database(db_build);

  CLI::App* db_synth = db->add_subcommand("synth", "generate procedural chair meshes");
  std::string synth_out;
  int synth_count = 20;
  db_synth->add_option("--out", synth_out, "mesh output directory")->required();
  db_synth->add_option("--count", synth_count, "number of meshes");
  flags.add_config(db_synth);
  flags.add_seed(db_synth);

  // segment
  CLI::App* segment = app.add_subcommand("segment", "extract and filter instance clusters");
  std::string segment_scene_path, segment_out;
  segment->add_option("--scene", segment_scene_path, "semantic scene cloud (PLY/PCD)")->required();
  segment->add_option("--out", segment_out, "output directory")->required();
  flags.add_config(segment);
  flags.add_class(segment);
  flags.add_segment(segment);
  flags.add_seed(segment);

  // match
  CLI::App* match_cmd = app.add_subcommand("match", "match clusters against the model database");
  std::string match_db, match_clusters_dir, match_cluster_file, match_out;
  match_cmd->add_option("--db", match_db, "model database directory")->required();
  match_cmd->add_option("--clusters", match_clusters_dir,
                        "segment output directory (filtered clusters)");
  match_cmd->add_option("--cluster", match_cluster_file, "single cluster PLY");
  match_cmd->add_option("--out", match_out, "output directory (defaults to --clusters)");
  flags.add_config(match_cmd);
  flags.add_class(match_cmd);
  flags.add_match(match_cmd);
  flags.add_seed(match_cmd);
  flags.add_workers(match_cmd);

  // complete
  CLI::App* complete = app.add_subcommand(
      "complete", "segment, filter, match and place objects in one pass");
  std::string complete_scene, complete_db, complete_out;
  complete->add_option("--scene", complete_scene, "semantic scene cloud")->required();
  complete->add_option("--db", complete_db, "model database directory")->required();
  complete->add_option("--out", complete_out, "output directory")->required();
  flags.add_config(complete);
  flags.add_class(complete);
  flags.add_segment(complete);
  flags.add_match(complete);
  flags.add_seed(complete);
  flags.add_workers(complete);

  // augment
  CLI::App* augment = app.add_subcommand("augment", "replace scene points with placed models");
  std::string augment_scene_path, augment_objects, augment_out;
  augment->add_option("--scene", augment_scene_path, "geometric scene cloud")->required();
  augment->add_option("--objects", augment_objects, "object layer directory")->required();
  augment->add_option("--out", augment_out, "augmented PLY path")->required();
  flags.add_config(augment);
  flags.add_epsilon(augment);
  flags.add_seed(augment);

  // costmap
  CLI::App* costmap = app.add_subcommand("costmap", "project the object layer to a 2D costmap");
  std::string costmap_objects, costmap_out, costmap_merge;
  costmap->add_option("--objects", costmap_objects, "object layer directory")->required();
  costmap->add_option("--out", costmap_out, "output base path (.pgm/.yaml appended)")->required();
  costmap->add_option("--merge", costmap_merge, "merge with this map (YAML sidecar)");
  flags.add_config(costmap);
  flags.add_costmap(costmap);
  flags.add_seed(costmap);

  // scene
  CLI::App* scene = app.add_subcommand("scene", "synthesize a labeled scene from a spec");
  std::string scene_spec, scene_db, scene_out;
  scene->add_option("--spec", scene_spec, "scene spec JSON")->required();
  scene->add_option("--db", scene_db, "model database directory")->required();
  scene->add_option("--out", scene_out, "output directory")->required();
  flags.add_config(scene);
  flags.add_seed(scene);

  // scan
  CLI::App* scan = app.add_subcommand("scan", "render a partial view of a cloud");
  std::string scan_model, scan_out;
  std::vector<double> scan_camera;
  int scan_res = 256;
  double scan_sigma = 0.0;
  scan->add_option("--model", scan_model, "model cloud PLY")->required();
  scan->add_option("--camera", scan_camera, "x y z lx ly lz (position and look-at)")
      ->expected(6)
      ->required();
  scan->add_option("--out", scan_out, "partial view output PLY")->required();
  scan->add_option("--image-res", scan_res, "image resolution in pixels");
  scan->add_option("--noise-sigma", scan_sigma, "range noise std, meters");
  flags.add_config(scan);
  flags.add_seed(scan);

  // eval
  CLI::App* eval = app.add_subcommand("eval", "precision / recall / F1 evaluation");
  std::string eval_counts, eval_truth, eval_objects, eval_matches, eval_out;
  eval->add_option("--counts", eval_counts, "JSON counts file with tp/fp/fn");
  eval->add_option("--truth", eval_truth, "ground truth JSON");
  eval->add_option("--objects", eval_objects, "object layer directory");
  eval->add_option("--matches", eval_matches, "match report JSONL");
  eval->add_option("--out", eval_out, "evaluation report JSON output");
  flags.add_config(eval);
  flags.add_eval(eval);
  flags.add_seed(eval);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << std::flush;
    return kExitUsage;
  }

  try {
    if (db_build->parsed()) return cmd_db_build(flags, meshes_dir, out_path);
    if (db_synth->parsed()) return cmd_db_synth(flags, synth_out, synth_count);
    if (segment->parsed()) return cmd_segment(flags, segment_scene_path, segment_out);
    if (match_cmd->parsed()) {
      if (match_clusters_dir.empty() == match_cluster_file.empty()) {
        std::cerr << "match needs exactly one of --clusters or --cluster\n";
        return kExitUsage;
      }
      return cmd_match(flags, match_db, match_clusters_dir, match_cluster_file, match_out);
    }
    if (complete->parsed()) return cmd_complete(flags, complete_scene, complete_db, complete_out);
    if (augment->parsed())
      return cmd_augment(flags, augment_scene_path, augment_objects, augment_out);
    if (costmap->parsed()) return cmd_costmap(flags, costmap_objects, costmap_out, costmap_merge);
    if (scene->parsed()) return cmd_scene(flags, scene_spec, scene_db, scene_out);
    if (scan->parsed())
      return cmd_scan(flags, scan_model, scan_camera, scan_out, scan_res, scan_sigma);
    if (eval->parsed())
      return cmd_eval(flags, eval_counts, eval_truth, eval_objects, eval_matches, eval_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace scomp::cli
