#include "scomp/modeldb.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scomp/cloud_io.hpp"
#include "scomp/error.hpp"
#include "scomp/mesh.hpp"
#include "scomp/parallel.hpp"
#include "scomp/rng.hpp"

namespace scomp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return hex;
}

std::uint64_t model_seed(const DatabaseParams& params, const std::string& model_id) {
  return mix_seed(params.seed ^ fnv1a64(model_id));
}

void check_entry_consistency(const ModelEntry& entry, std::size_t db_points,
                             const std::string& file) {
  if (entry.cloud.size() != db_points)
    throw Error(file + ": model has " + std::to_string(entry.cloud.size()) +
                " points, manifest says " + std::to_string(db_points));
  double min_z = std::numeric_limits<double>::infinity();
  double max_z = -std::numeric_limits<double>::infinity();
  Point3 c;
  for (const Point3& p : entry.cloud.points) {
    min_z = std::min(min_z, p.z);
    max_z = std::max(max_z, p.z);
    c += p;
  }
  c = c / static_cast<double>(entry.cloud.size());
  if (std::abs(min_z) > 1e-9) throw Error(file + ": model is not grounded at z = 0");
  if (std::abs(c.x) > 1e-5 || std::abs(c.y) > 1e-5)
    throw Error(file + ": model xy-centroid is not at the origin");
  if (std::abs(entry.lambda - farthest_point_distance(entry.cloud)) > 1e-9)
    throw Error(file + ": stored lambda disagrees with the cloud");
  if (std::abs(entry.height - (max_z - min_z)) > 1e-9)
    throw Error(file + ": stored height disagrees with the cloud");
}

}  // namespace

const ModelEntry* ModelDatabase::find(const std::string& model_id) const {
  const auto it = std::lower_bound(
      entries.begin(), entries.end(), model_id,
      [](const ModelEntry& e, const std::string& id) { return e.model_id < id; });
  if (it == entries.end() || it->model_id != model_id) return nullptr;
  return &*it;
}

std::vector<const ModelEntry*> ModelDatabase::of_class(std::uint8_t class_id) const {
  std::vector<const ModelEntry*> out;
  for (const ModelEntry& e : entries)
    if (e.class_id == class_id) out.push_back(&e);
  return out;
}

std::vector<std::uint8_t> ModelDatabase::classes() const {
  std::vector<std::uint8_t> out;
  for (const ModelEntry& e : entries)
    if (std::find(out.begin(), out.end(), e.class_id) == out.end()) out.push_back(e.class_id);
  std::sort(out.begin(), out.end());
  return out;
}

ModelEntry ingest_model(const std::string& mesh_path, std::uint8_t class_id,
                        std::size_t surface_samples, std::size_t db_points, std::uint64_t seed) {
  if (db_points == 0 || surface_samples < db_points)
    throw Error("ingest_model: need surface_samples >= db_points > 0");

  const TriangleMesh mesh = load_mesh(mesh_path);
  if (mesh.faces.empty() || !(surface_area(mesh) > 0.0))
    throw Error(mesh_path + ": mesh has zero surface area");

  Rng rng(seed);
  const PointCloud dense = sample_surface(mesh, surface_samples, rng);
  PointCloud cloud = farthest_point_subsample(dense, db_points, rng);

  // canonical frame: xy-centroid at origin, ground contact at z = 0
  const Point3 c = centroid(cloud);
  double min_z = std::numeric_limits<double>::infinity();
  for (const Point3& p : cloud.points) min_z = std::min(min_z, p.z);
  for (Point3& p : cloud.points) {
    p.x = round_to_file_precision(p.x - c.x);
    p.y = round_to_file_precision(p.y - c.y);
    p.z = round_to_file_precision(p.z - min_z);
  }

  ModelEntry entry;
  entry.model_id = mesh_path;
  entry.class_id = class_id;
  entry.cloud = std::move(cloud);
  entry.lambda = farthest_point_distance(entry.cloud);
  double max_z = 0.0;
  for (const Point3& p : entry.cloud.points) max_z = std::max(max_z, p.z);
  entry.height = max_z;
  entry.source = mesh_path;
  return entry;
}

DatabaseBuildResult build_database(const std::string& mesh_dir, std::uint8_t class_id,
                                   const DatabaseParams& params) {
  if (!fs::is_directory(mesh_dir)) throw IoError("mesh directory '" + mesh_dir + "' not found");

  std::vector<std::string> relative;
  for (const auto& item : fs::recursive_directory_iterator(mesh_dir)) {
    if (!item.is_regular_file()) continue;
    const std::string ext = item.path().extension().string();
    if (ext == ".obj" || ext == ".OBJ" || ext == ".ply" || ext == ".PLY")
      relative.push_back(fs::relative(item.path(), mesh_dir).generic_string());
  }
  if (relative.empty()) throw Error("mesh directory '" + mesh_dir + "' holds no meshes");
  std::sort(relative.begin(), relative.end());

  DatabaseBuildResult result;
  result.db.params = params;
  for (const std::string& rel : relative) {
    const std::string full = (fs::path(mesh_dir) / rel).generic_string();
    try {
      ModelEntry entry = ingest_model(full, class_id, params.surface_samples, params.db_points,
                                      model_seed(params, rel));
      entry.model_id = rel;
      entry.source = full;
      result.db.entries.push_back(std::move(entry));
    } catch (const Error& e) {
      result.failures.emplace_back(full, e.what());
    }
  }
  if (result.db.entries.empty())
    throw Error("build_database: no mesh could be ingested from '" + mesh_dir + "'");
  return result;
}

void save_database(const ModelDatabase& db, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "models");

  json manifest;
  manifest["format"] = "scomp-modeldb";
  manifest["version"] = 1;
  manifest["db_points"] = db.params.db_points;
  manifest["surface_samples"] = db.params.surface_samples;
  manifest["seed"] = db.params.seed;
  manifest["classes"] = db.classes();

  json entries = json::array();
  for (const ModelEntry& e : db.entries) {
    const std::string rel_file = "models/" + e.model_id + ".ply";
    const fs::path file = fs::path(dir) / rel_file;
    fs::create_directories(file.parent_path());
    save_cloud(e.cloud, file.generic_string());

    json j;
    j["model_id"] = e.model_id;
    j["class_id"] = e.class_id;
    j["file"] = rel_file;
    j["lambda"] = e.lambda;
    j["height"] = e.height;
    j["source"] = e.source;
    j["checksum"] = file_checksum(file.generic_string());
    entries.push_back(std::move(j));
  }
  manifest["entries"] = std::move(entries);

  const std::string manifest_path = (fs::path(dir) / "manifest.json").generic_string();
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write '" + manifest_path + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + manifest_path + "'");
}

ModelDatabase load_database(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").generic_string();
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open '" + manifest_path + "'");

  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }

  ModelDatabase db;
  try {
    if (manifest.at("format").get<std::string>() != "scomp-modeldb")
      throw ParseError(manifest_path + ": not a model database manifest");
    db.params.db_points = manifest.at("db_points").get<std::size_t>();
    db.params.surface_samples = manifest.at("surface_samples").get<std::size_t>();
    db.params.seed = manifest.at("seed").get<std::uint64_t>();

    for (const json& j : manifest.at("entries")) {
      ModelEntry e;
      e.model_id = j.at("model_id").get<std::string>();
      e.class_id = j.at("class_id").get<std::uint8_t>();
      e.lambda = j.at("lambda").get<double>();
      e.height = j.at("height").get<double>();
      e.source = j.at("source").get<std::string>();

      const std::string rel_file = j.at("file").get<std::string>();
      const std::string file = (fs::path(dir) / rel_file).generic_string();
      if (!fs::exists(file)) throw Error(file + ": model file missing");
      const std::string expected = j.at("checksum").get<std::string>();
      const std::string actual = file_checksum(file);
      if (expected != actual)
        throw Error(file + ": checksum mismatch (manifest " + expected + ", file " + actual + ")");

      e.cloud = load_cloud(file);
      check_entry_consistency(e, db.params.db_points, file);
      db.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }

  std::sort(db.entries.begin(), db.entries.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.model_id < b.model_id; });
  for (std::size_t i = 1; i < db.entries.size(); ++i)
    if (db.entries[i].model_id == db.entries[i - 1].model_id)
      throw Error(manifest_path + ": duplicate model_id '" + db.entries[i].model_id + "'");
  return db;
}

MatchResult match(const Cluster& partial, const ModelDatabase& db, const MatchParams& params) {
  params.reg.validate();
  if (partial.cloud.empty()) throw Error("match: empty cluster");

  const std::vector<const ModelEntry*> candidates = db.of_class(partial.class_id);
  if (candidates.empty())
    throw Error("match: no database model of class " + std::to_string(int(partial.class_id)));

  Cluster working = partial;
  if (params.partial_leaf > 0.0)
    working.cloud = voxel_downsample(partial.cloud, params.partial_leaf);
  auto [local, to_world] = normalize_partial(working, params.reg.grounding);

  // paper-compat coarse path: one seeded random model supplies yaw and
  // translation for every candidate; scale stays per-candidate.
  GroundedTransform shared_coarse;
  if (params.paper_coarse) {
    Rng rng(params.seed);
    const ModelEntry* pick = candidates[rng.uniform_index(candidates.size())];
    shared_coarse = coarse_align(pick->cloud, local, params.reg);
  }

  struct Candidate {
    Alignment alignment;
    double delta = 0.0;
  };
  std::vector<Candidate> results(candidates.size());
  parallel_for(candidates.size(), params.workers, [&](std::size_t i) {
    const ModelEntry& entry = *candidates[i];
    const NeighborIndex index(entry.cloud);
    GroundedTransform t0;
    if (params.paper_coarse) {
      t0 = shared_coarse;
      t0.scale = initial_scale(local, entry.cloud);
    } else {
      t0 = coarse_align(index, local, params.reg);
    }
    results[i].alignment = icp_refine(index, local, t0, params.reg);
    results[i].delta = results[i].alignment.delta;
  });

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (results[a].delta != results[b].delta) return results[a].delta < results[b].delta;
    return candidates[a]->model_id < candidates[b]->model_id;
  });

  MatchResult out;
  out.cluster_id = partial.cluster_id;
  out.class_id = partial.class_id;
  out.model_id = candidates[order[0]]->model_id;
  out.alignment = results[order[0]].alignment;
  out.delta = results[order[0]].delta;
  out.world_transform = compose(to_world, out.alignment.transform);
  const std::size_t keep = std::min<std::size_t>(order.size(),
                                                 params.top_k > 0 ? params.top_k : order.size());
  for (std::size_t r = 0; r < keep; ++r)
    out.ranking.emplace_back(candidates[order[r]]->model_id, results[order[r]].delta);
  return out;
}

void write_match_report(const std::vector<MatchResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const MatchResult& m : results) {
    json j;
    j["cluster_id"] = m.cluster_id;
    j["class_id"] = m.class_id;
    j["model_id"] = m.model_id;
    j["delta"] = m.delta;
    j["yaw"] = m.world_transform.yaw;
    j["translation"] = {m.world_transform.translation.x, m.world_transform.translation.y,
                        m.world_transform.translation.z};
    j["scale"] = m.world_transform.scale;
    j["iterations"] = m.alignment.iterations;
    json ranking = json::array();
    for (const auto& [id, delta] : m.ranking) ranking.push_back({id, delta});
    j["ranking"] = std::move(ranking);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<MatchResult> read_match_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<MatchResult> out;
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
    MatchResult m;
    m.cluster_id = j.at("cluster_id").get<int>();
    m.class_id = j.at("class_id").get<std::uint8_t>();
    m.model_id = j.at("model_id").get<std::string>();
    m.delta = j.at("delta").get<double>();
    m.world_transform.yaw = j.at("yaw").get<double>();
    const auto& t = j.at("translation");
    m.world_transform.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                                     t.at(2).get<double>()};
    m.world_transform.scale = j.at("scale").get<double>();
    m.alignment.iterations = j.at("iterations").get<int>();
    for (const auto& r : j.at("ranking"))
      m.ranking.emplace_back(r.at(0).get<std::string>(), r.at(1).get<double>());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace scomp
