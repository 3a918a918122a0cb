#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scomp/geometry.hpp"

namespace scomp {

/// Reads a point cloud from disk. PLY (ASCII or binary little-endian) with
/// vertex properties x y z (float32 or float64), optional nx ny nz, optional
/// class_id (uint8); or ASCII PCD with fields x y z and optional label.
/// Labels are populated iff the file declares them; point order is preserved.
/// Throws ParseError (with line/record context) on malformed or non-finite
/// input, IoError when the file cannot be opened.
PointCloud load_cloud(const std::string& path);

/// Writes ASCII PLY with coordinates at 6 decimal digits. Normals and labels
/// are declared iff present on the cloud.
void save_cloud(const PointCloud& cloud, const std::string& path);

/// Variant carrying the per-point provenance tag used by augmented scenes
/// (uint16; 0 = original scene point, k = k-th placed object).
struct ProvenancedCloud {
  PointCloud cloud;
  std::vector<std::uint16_t> provenance;
};

ProvenancedCloud load_cloud_with_provenance(const std::string& path);
void save_cloud_with_provenance(const PointCloud& cloud,
                                const std::vector<std::uint16_t>& provenance,
                                const std::string& path);

/// Quantizes a coordinate to the file precision (6 decimal digits), through
/// the exact same text path the writer and reader use.
double round_to_file_precision(double v);

}  // namespace scomp
