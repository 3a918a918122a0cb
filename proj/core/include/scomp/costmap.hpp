#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scomp/augmentation.hpp"
#include "scomp/geometry.hpp"

namespace scomp {

inline constexpr std::uint8_t kCellFree = 0;
inline constexpr std::uint8_t kCellOccupied = 100;
inline constexpr std::uint8_t kCellUnknown = 255;

/// Row-major 2D occupancy lattice; origin is the world pose of cell (0,0)'s
/// lower-left corner.
struct OccupancyGrid {
  double resolution = 0.05;  // meters per cell
  double origin_x = 0.0;
  double origin_y = 0.0;
  double origin_yaw = 0.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // kCellFree / kCellOccupied / kCellUnknown

  std::uint8_t at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * width + ix]; }
  std::uint8_t& at(int ix, int iy) { return cells[static_cast<std::size_t>(iy) * width + ix]; }
};

struct ProjectionParams {
  double z_min = 0.1;        // lower projection bound, meters
  double z_max = 1.0;        // robot height h, meters
  double resolution = 0.05;  // meters per cell
  double padding = 0.25;     // free border around the layer bounds, meters
};

struct GridBounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

/// Projects object-layer points with z in [z_min, z_max] onto a grid covering
/// the layer's xy bounds plus padding (or the explicit bounds). A cell is
/// occupied iff at least one in-range point falls in it; every other cell is
/// free. Errors when the layer is empty and no bounds are supplied.
OccupancyGrid project_objects(const ObjectLayer& layer, const ProjectionParams& params,
                              const std::optional<GridBounds>& bounds = std::nullopt);

/// Union-extent merge of two grids on the same lattice: occupied wins over
/// free wins over unknown, cell by cell. Errors on resolution or lattice
/// mismatch.
OccupancyGrid merge_grids(const OccupancyGrid& a, const OccupancyGrid& b);

/// Writes <base>.pgm (P5, maxval 255; occupied = 0, free = 254, unknown = 205)
/// plus <base>.yaml with image/resolution/origin/negate/occupied_thresh/
/// free_thresh, following the common 2D map-file convention (top PGM row is
/// the highest y).
void save_grid(const OccupancyGrid& grid, const std::string& base_path);

/// Loads a map from its YAML sidecar; gray values map through the declared
/// thresholds, so grids written by other tools are accepted.
OccupancyGrid load_grid(const std::string& yaml_path);

}  // namespace scomp
