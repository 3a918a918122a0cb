#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scomp/geometry.hpp"
#include "scomp/modeldb.hpp"

namespace scomp {

struct PlacedObject {
  MatchResult match;
  PointCloud cloud;  // world frame; the database cloud under match.world_transform
};

/// Completed object instances placed into the world frame.
struct ObjectLayer {
  std::vector<PlacedObject> objects;
};

/// Scene cloud with per-point provenance: 0 = original scene point,
/// k = point of the k-th placed object (1-based, cluster_id order).
struct AugmentedScene {
  PointCloud cloud;
  std::vector<std::uint16_t> provenance;
};

/// Database cloud of match.model_id under match.world_transform. In floor
/// grounding mode the placement is shifted so its minimum z lands on 0.
/// Errors on an unknown model_id.
PointCloud place_model(const MatchResult& match, const ModelDatabase& db,
                       Grounding grounding = Grounding::partial_extent);

/// world_transform adjusted for the grounding mode (identity adjustment in
/// partial_extent mode).
GroundedTransform grounded_world_transform(const MatchResult& match, const ModelDatabase& db,
                                           Grounding grounding);

/// Places every match, ordered by cluster_id; the stored MatchResult carries
/// the grounded transform so placed clouds always equal the database cloud
/// under their recorded world_transform.
ObjectLayer build_object_layer(const std::vector<MatchResult>& matches, const ModelDatabase& db,
                               Grounding grounding = Grounding::partial_extent);

/// Augmented scene A = (G \ S) u O where S is every scene point within
/// epsilon of some placed model point. Surviving scene points keep their
/// exact coordinates and input order; placed objects follow in layer order.
/// Labels are carried through when the scene has them (placed points take
/// their match's class).
AugmentedScene augment_scene(const PointCloud& scene, const ObjectLayer& layer, double epsilon);

/// augmented.ply: ASCII PLY with an extra uint16 provenance property.
void save_augmented(const AugmentedScene& scene, const std::string& path);
AugmentedScene load_augmented(const std::string& path);

/// One PLY per placed object, named object_<cluster_id>.ply (zero-padded).
void save_object_layer(const ObjectLayer& layer, const std::string& dir);

/// Reads back placed clouds; match metadata is restored when a match report
/// is supplied (matched to objects by cluster_id).
ObjectLayer load_object_layer(const std::string& dir,
                              const std::vector<MatchResult>* matches = nullptr);

}  // namespace scomp
