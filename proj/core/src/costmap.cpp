#include "scomp/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "scomp/error.hpp"

namespace scomp {

namespace fs = std::filesystem;

namespace {

void validate_projection(const ProjectionParams& p) {
  if (!(p.z_min < p.z_max)) throw Error("projection params: need z_min < z_max");
  if (!(p.resolution > 0.0)) throw Error("projection params: resolution must be positive");
  if (p.padding < 0.0) throw Error("projection params: negative padding");
}

int cell_of(double coord, double origin, double resolution) {
  return static_cast<int>(std::floor((coord - origin) / resolution));
}

}  // namespace

OccupancyGrid project_objects(const ObjectLayer& layer, const ProjectionParams& params,
                              const std::optional<GridBounds>& bounds) {
  validate_projection(params);

  GridBounds b;
  if (bounds) {
    b = *bounds;
    if (!(b.min_x <= b.max_x) || !(b.min_y <= b.max_y))
      throw Error("project_objects: malformed bounds");
  } else {
    bool any = false;
    b.min_x = b.min_y = std::numeric_limits<double>::infinity();
    b.max_x = b.max_y = -std::numeric_limits<double>::infinity();
    for (const PlacedObject& obj : layer.objects)
      for (const Point3& p : obj.cloud.points) {
        any = true;
        b.min_x = std::min(b.min_x, p.x);
        b.max_x = std::max(b.max_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_y = std::max(b.max_y, p.y);
      }
    if (!any) throw Error("project_objects: empty object layer and no explicit bounds");
  }

  OccupancyGrid grid;
  grid.resolution = params.resolution;
  grid.origin_x = b.min_x - params.padding;
  grid.origin_y = b.min_y - params.padding;
  grid.width = cell_of(b.max_x + params.padding, grid.origin_x, params.resolution) + 1;
  grid.height = cell_of(b.max_y + params.padding, grid.origin_y, params.resolution) + 1;
  grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, kCellFree);

  for (const PlacedObject& obj : layer.objects)
    for (const Point3& p : obj.cloud.points) {
      if (p.z < params.z_min || p.z > params.z_max) continue;
      const int ix = cell_of(p.x, grid.origin_x, params.resolution);
      const int iy = cell_of(p.y, grid.origin_y, params.resolution);
      if (ix < 0 || iy < 0 || ix >= grid.width || iy >= grid.height) continue;
      grid.at(ix, iy) = kCellOccupied;
    }
  return grid;
}

OccupancyGrid merge_grids(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (a.resolution != b.resolution) throw Error("merge_grids: resolution mismatch");
  if (a.origin_yaw != 0.0 || b.origin_yaw != 0.0)
    throw Error("merge_grids: only axis-aligned grids (yaw 0) can be merged");

  const double res = a.resolution;
  const double fx = (b.origin_x - a.origin_x) / res;
  const double fy = (b.origin_y - a.origin_y) / res;
  const double rx = std::round(fx);
  const double ry = std::round(fy);
  if (std::abs(fx - rx) > 1e-6 || std::abs(fy - ry) > 1e-6)
    throw Error("merge_grids: origins are not on the same cell lattice");

  // b's cell (0,0) sits at cell (bx0, by0) of a's lattice
  const long long bx0 = static_cast<long long>(rx);
  const long long by0 = static_cast<long long>(ry);

  const long long min_x = std::min(0LL, bx0);
  const long long min_y = std::min(0LL, by0);
  const long long max_x = std::max<long long>(a.width, bx0 + b.width);
  const long long max_y = std::max<long long>(a.height, by0 + b.height);

  OccupancyGrid out;
  out.resolution = res;
  // take the corner origin verbatim from whichever input supplies it, so the
  // merge is bitwise commutative
  out.origin_x = min_x == 0 ? a.origin_x : std::min(a.origin_x, b.origin_x);
  out.origin_y = min_y == 0 ? a.origin_y : std::min(a.origin_y, b.origin_y);
  out.width = static_cast<int>(max_x - min_x);
  out.height = static_cast<int>(max_y - min_y);
  out.cells.assign(static_cast<std::size_t>(out.width) * out.height, kCellUnknown);

  const auto value_at = [](const OccupancyGrid& g, long long x, long long y) -> std::uint8_t {
    if (x < 0 || y < 0 || x >= g.width || y >= g.height) return kCellUnknown;
    return g.at(static_cast<int>(x), static_cast<int>(y));
  };

  for (long long y = min_y; y < max_y; ++y)
    for (long long x = min_x; x < max_x; ++x) {
      const std::uint8_t va = value_at(a, x, y);
      const std::uint8_t vb = value_at(b, x - bx0, y - by0);
      std::uint8_t v = kCellUnknown;
      if (va == kCellOccupied || vb == kCellOccupied)
        v = kCellOccupied;
      else if (va == kCellFree || vb == kCellFree)
        v = kCellFree;
      out.at(static_cast<int>(x - min_x), static_cast<int>(y - min_y)) = v;
    }
  return out;
}

void save_grid(const OccupancyGrid& grid, const std::string& base_path) {
  const std::string pgm_path = base_path + ".pgm";
  const std::string yaml_path = base_path + ".yaml";

  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw IoError("cannot write '" + pgm_path + "'");
  pgm << "P5\n" << grid.width << " " << grid.height << "\n255\n";
  // top image row is the highest y row of the grid
  for (int iy = grid.height - 1; iy >= 0; --iy)
    for (int ix = 0; ix < grid.width; ++ix) {
      std::uint8_t pixel = 205;  // unknown
      const std::uint8_t cell = grid.at(ix, iy);
      if (cell == kCellOccupied)
        pixel = 0;
      else if (cell == kCellFree)
        pixel = 254;
      pgm.put(static_cast<char>(pixel));
    }
  if (!pgm) throw IoError("write failure on '" + pgm_path + "'");
  pgm.close();

  std::ofstream yaml(yaml_path);
  if (!yaml) throw IoError("cannot write '" + yaml_path + "'");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "image: %s\nresolution: %.6f\norigin: [%.6f, %.6f, %.6f]\nnegate: 0\n"
                "occupied_thresh: 0.65\nfree_thresh: 0.196\n",
                fs::path(pgm_path).filename().string().c_str(), grid.resolution, grid.origin_x,
                grid.origin_y, grid.origin_yaw);
  yaml << buf;
  if (!yaml) throw IoError("write failure on '" + yaml_path + "'");
}

OccupancyGrid load_grid(const std::string& yaml_path) {
  std::ifstream yaml(yaml_path);
  if (!yaml) throw IoError("cannot open '" + yaml_path + "'");

  std::string image;
  double resolution = 0.0, occupied_thresh = 0.65, free_thresh = 0.196;
  double ox = 0.0, oy = 0.0, oyaw = 0.0;
  int negate = 0;
  bool have_image = false, have_resolution = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(yaml, line)) {
    ++line_no;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    const auto fail = [&](const char* what) {
      throw ParseError(yaml_path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (key == "image") {
      std::istringstream vs(value);
      vs >> image;
      have_image = !image.empty();
    } else if (key == "resolution") {
      resolution = std::stod(value);
      have_resolution = true;
    } else if (key == "origin") {
      for (char& c : value)
        if (c == '[' || c == ']' || c == ',') c = ' ';
      std::istringstream vs(value);
      if (!(vs >> ox >> oy >> oyaw)) fail("malformed origin");
    } else if (key == "negate") {
      negate = std::stoi(value);
    } else if (key == "occupied_thresh") {
      occupied_thresh = std::stod(value);
    } else if (key == "free_thresh") {
      free_thresh = std::stod(value);
    }
  }
  if (!have_image) throw ParseError(yaml_path + ": missing image entry");
  if (!have_resolution || !(resolution > 0.0))
    throw ParseError(yaml_path + ": missing or invalid resolution");

  const std::string pgm_path = (fs::path(yaml_path).parent_path() / image).string();
  std::ifstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw IoError("cannot open '" + pgm_path + "'");

  // PGM header: magic, width, height, maxval; '#' comments allowed between tokens
  const auto next_token = [&]() -> std::string {
    std::string token;
    while (pgm >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(pgm, rest);
        continue;
      }
      return token;
    }
    throw ParseError(pgm_path + ": truncated PGM header");
  };
  if (next_token() != "P5") throw ParseError(pgm_path + ": not a binary PGM (P5)");
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (width <= 0 || height <= 0 || maxval != 255)
    throw ParseError(pgm_path + ": unsupported PGM geometry");
  pgm.get();  // single whitespace after maxval

  OccupancyGrid grid;
  grid.resolution = resolution;
  grid.origin_x = ox;
  grid.origin_y = oy;
  grid.origin_yaw = oyaw;
  grid.width = width;
  grid.height = height;
  grid.cells.assign(static_cast<std::size_t>(width) * height, kCellUnknown);

  std::vector<char> row(width);
  for (int image_row = 0; image_row < height; ++image_row) {
    pgm.read(row.data(), width);
    if (!pgm) throw ParseError(pgm_path + ": truncated PGM payload");
    const int iy = height - 1 - image_row;
    for (int ix = 0; ix < width; ++ix) {
      const double p = static_cast<double>(static_cast<unsigned char>(row[ix])) / 255.0;
      const double occ = negate ? p : 1.0 - p;
      std::uint8_t cell = kCellUnknown;
      if (occ >= occupied_thresh)
        cell = kCellOccupied;
      else if (occ <= free_thresh)
        cell = kCellFree;
      grid.at(ix, iy) = cell;
    }
  }
  return grid;
}

}  // namespace scomp
