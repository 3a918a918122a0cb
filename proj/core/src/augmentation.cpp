#include "scomp/augmentation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "scomp/cloud_io.hpp"
#include "scomp/error.hpp"
#include "scomp/kdtree.hpp"

namespace scomp {

namespace fs = std::filesystem;

GroundedTransform grounded_world_transform(const MatchResult& match, const ModelDatabase& db,
                                           Grounding grounding) {
  const ModelEntry* entry = db.find(match.model_id);
  if (!entry) throw Error("place_model: unknown model_id '" + match.model_id + "'");

  GroundedTransform t = match.world_transform;
  if (grounding == Grounding::floor) {
    // the canonical cloud touches z = 0, so the placed minimum z is the
    // transform's z translation; force ground contact in the world
    double min_z = std::numeric_limits<double>::infinity();
    for (const Point3& p : entry->cloud.points) min_z = std::min(min_z, t.apply(p).z);
    t.translation.z -= min_z;
  }
  return t;
}

PointCloud place_model(const MatchResult& match, const ModelDatabase& db, Grounding grounding) {
  const ModelEntry* entry = db.find(match.model_id);
  if (!entry) throw Error("place_model: unknown model_id '" + match.model_id + "'");
  return apply_transform(entry->cloud, grounded_world_transform(match, db, grounding));
}

ObjectLayer build_object_layer(const std::vector<MatchResult>& matches, const ModelDatabase& db,
                               Grounding grounding) {
  std::vector<MatchResult> ordered = matches;
  std::sort(ordered.begin(), ordered.end(),
            [](const MatchResult& a, const MatchResult& b) { return a.cluster_id < b.cluster_id; });

  ObjectLayer layer;
  layer.objects.reserve(ordered.size());
  for (MatchResult& m : ordered) {
    m.world_transform = grounded_world_transform(m, db, grounding);
    PlacedObject obj;
    obj.cloud = place_model(m, db, Grounding::partial_extent);  // transform already grounded
    obj.match = std::move(m);
    layer.objects.push_back(std::move(obj));
  }
  return layer;
}

AugmentedScene augment_scene(const PointCloud& scene, const ObjectLayer& layer, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("augment_scene: epsilon must be positive");

  std::vector<NeighborIndex> indices;
  indices.reserve(layer.objects.size());
  for (const PlacedObject& obj : layer.objects) indices.emplace_back(obj.cloud);

  AugmentedScene out;
  const bool labeled = scene.has_labels();

  for (std::size_t i = 0; i < scene.size(); ++i) {
    bool superseded = false;
    for (const NeighborIndex& index : indices) {
      if (index.nearest(scene.points[i]).distance <= epsilon) {
        superseded = true;
        break;
      }
    }
    if (superseded) continue;
    out.cloud.points.push_back(scene.points[i]);
    if (labeled) out.cloud.labels.push_back(scene.labels[i]);
    out.provenance.push_back(0);
  }

  for (std::size_t k = 0; k < layer.objects.size(); ++k) {
    const PlacedObject& obj = layer.objects[k];
    for (const Point3& p : obj.cloud.points) {
      out.cloud.points.push_back(p);
      if (labeled) out.cloud.labels.push_back(obj.match.class_id);
      out.provenance.push_back(static_cast<std::uint16_t>(k + 1));
    }
  }
  return out;
}

void save_augmented(const AugmentedScene& scene, const std::string& path) {
  save_cloud_with_provenance(scene.cloud, scene.provenance, path);
}

AugmentedScene load_augmented(const std::string& path) {
  ProvenancedCloud loaded = load_cloud_with_provenance(path);
  if (loaded.provenance.size() != loaded.cloud.size())
    throw ParseError(path + ": missing provenance property");
  return {std::move(loaded.cloud), std::move(loaded.provenance)};
}

namespace {

std::string object_file_name(int cluster_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "object_%04d.ply", cluster_id);
  return buf;
}

}  // namespace

void save_object_layer(const ObjectLayer& layer, const std::string& dir) {
  fs::create_directories(dir);
  for (const PlacedObject& obj : layer.objects)
    save_cloud(obj.cloud, (fs::path(dir) / object_file_name(obj.match.cluster_id)).string());
}

ObjectLayer load_object_layer(const std::string& dir, const std::vector<MatchResult>* matches) {
  if (!fs::is_directory(dir)) throw IoError("object layer directory '" + dir + "' not found");

  std::vector<std::string> files;
  for (const auto& item : fs::directory_iterator(dir)) {
    const std::string name = item.path().filename().string();
    if (name.rfind("object_", 0) == 0 && item.path().extension() == ".ply")
      files.push_back(item.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("object layer directory '" + dir + "' holds no object_*.ply");

  ObjectLayer layer;
  for (const std::string& file : files) {
    PlacedObject obj;
    obj.cloud = load_cloud(file);
    const std::string stem = fs::path(file).stem().string();  // object_0007
    obj.match.cluster_id = std::stoi(stem.substr(stem.find('_') + 1));
    if (obj.cloud.has_labels()) obj.match.class_id = obj.cloud.labels.front();
    layer.objects.push_back(std::move(obj));
  }

  if (matches) {
    for (PlacedObject& obj : layer.objects)
      for (const MatchResult& m : *matches)
        if (m.cluster_id == obj.match.cluster_id) {
          obj.match = m;
          break;
        }
  }
  return layer;
}

}  // namespace scomp
