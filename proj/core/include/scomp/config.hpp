#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "scomp/costmap.hpp"
#include "scomp/modeldb.hpp"
#include "scomp/registration.hpp"
#include "scomp/segmentation.hpp"

namespace scomp {

/// Every tunable of the pipeline with its documented default. Loadable from a
/// flat key = value file; command-line flags override file values.
struct PipelineConfig {
  std::uint8_t class_id = 1;
  std::uint64_t seed = 0;
  int workers = 0;      // 0 = hardware concurrency
  double epsilon = 0.1; // scene-point removal radius, meters

  SegmentationParams segmentation;
  RegistrationParams registration;

  int top_k = 5;
  bool paper_coarse = false;
  double partial_leaf = 0.02;

  DatabaseParams database;
  ProjectionParams costmap;
  double d_match = 0.5;

  MatchParams match_params() const;

  /// Parses key = value lines ('#' comments allowed); unknown keys are
  /// rejected with the offending line.
  static PipelineConfig load(const std::string& path);

  /// Applies one key/value pair (the file loader and the flag override path
  /// share this). Throws Error on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Prints every effective key = value, in a fixed order.
  void print(std::ostream& os) const;
};

}  // namespace scomp
