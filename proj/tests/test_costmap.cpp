#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "scomp/costmap.hpp"
#include "scomp/error.hpp"

using namespace scomp;

namespace {

ObjectLayer layer_of(std::vector<Point3> points) {
  ObjectLayer layer;
  PlacedObject obj;
  obj.cloud.points = std::move(points);
  layer.objects.push_back(std::move(obj));
  return layer;
}

OccupancyGrid random_grid(Rng& rng, int w, int h, double res, double ox, double oy) {
  OccupancyGrid g;
  g.resolution = res;
  g.origin_x = ox;
  g.origin_y = oy;
  g.width = w;
  g.height = h;
  g.cells.resize(static_cast<std::size_t>(w) * h);
  for (auto& c : g.cells) {
    const double r = rng.uniform();
    c = r < 0.3 ? kCellOccupied : (r < 0.6 ? kCellFree : kCellUnknown);
  }
  return g;
}

}  // namespace

TEST_CASE("a single point lands in the expected cell") {
  const ObjectLayer layer = layer_of({{0.52, 0.03, 0.4}});
  ProjectionParams params;
  params.z_min = 0.1;
  params.z_max = 0.6;
  params.resolution = 0.05;
  params.padding = 0.0;
  const GridBounds bounds{0.0, 0.0, 1.0, 1.0};
  const OccupancyGrid grid = project_objects(layer, params, bounds);

  CHECK(grid.origin_x == 0.0);
  CHECK(grid.origin_y == 0.0);
  std::size_t occupied = 0;
  for (int iy = 0; iy < grid.height; ++iy)
    for (int ix = 0; ix < grid.width; ++ix)
      if (grid.at(ix, iy) == kCellOccupied) {
        ++occupied;
        CHECK(ix == 10);
        CHECK(iy == 0);
      }
  CHECK(occupied == 1);
}

TEST_CASE("points outside the z interval never occupy cells") {
  const ObjectLayer layer = layer_of({{0.5, 0.5, 0.05}, {0.2, 0.2, 0.95}});
  ProjectionParams params;
  params.z_min = 0.1;
  params.z_max = 0.9;
  const OccupancyGrid grid = project_objects(layer, params);
  for (const auto c : grid.cells) CHECK(c == kCellFree);
}

TEST_CASE("interval bounds are inclusive") {
  const ObjectLayer layer = layer_of({{0.5, 0.5, 0.1}, {1.5, 0.5, 1.0}});
  ProjectionParams params;
  params.z_min = 0.1;
  params.z_max = 1.0;
  const OccupancyGrid grid = project_objects(layer, params);
  std::size_t occupied = 0;
  for (const auto c : grid.cells)
    if (c == kCellOccupied) ++occupied;
  CHECK(occupied == 2);
}

TEST_CASE("occupied cells match the per-point rasterization oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point3> points;
    const std::size_t n = 50 + rng.uniform_index(300);
    for (std::size_t i = 0; i < n; ++i)
      points.push_back({rng.uniform(-3, 3), rng.uniform(-2, 4), rng.uniform(-0.2, 1.4)});
    const ObjectLayer layer = layer_of(points);

    ProjectionParams params;
    params.z_min = 0.1;
    params.z_max = 1.0;
    params.resolution = 0.05 + 0.1 * rng.uniform();
    params.padding = 0.5 * rng.uniform();
    const OccupancyGrid grid = project_objects(layer, params);

    std::set<std::pair<int, int>> expected;
    for (const Point3& p : points) {
      if (p.z < params.z_min || p.z > params.z_max) continue;
      const int ix = int(std::floor((p.x - grid.origin_x) / params.resolution));
      const int iy = int(std::floor((p.y - grid.origin_y) / params.resolution));
      REQUIRE(ix >= 0);
      REQUIRE(iy >= 0);
      REQUIRE(ix < grid.width);
      REQUIRE(iy < grid.height);
      expected.insert({ix, iy});
    }
    std::set<std::pair<int, int>> got;
    for (int iy = 0; iy < grid.height; ++iy)
      for (int ix = 0; ix < grid.width; ++ix)
        if (grid.at(ix, iy) == kCellOccupied) got.insert({ix, iy});
    CHECK(got == expected);
    CHECK(got.size() <= n);
  }
}

TEST_CASE("shrinking the z interval never adds occupied cells") {
  Rng rng(11);
  std::vector<Point3> points;
  for (int i = 0; i < 400; ++i)
    points.push_back({rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 1.2)});
  const ObjectLayer layer = layer_of(points);

  ProjectionParams wide;
  wide.z_min = 0.05;
  wide.z_max = 1.1;
  ProjectionParams narrow = wide;
  narrow.z_min = 0.3;
  narrow.z_max = 0.8;

  const GridBounds bounds{0, 0, 2, 2};
  const OccupancyGrid gw = project_objects(layer, wide, bounds);
  const OccupancyGrid gn = project_objects(layer, narrow, bounds);
  REQUIRE(gw.cells.size() == gn.cells.size());
  for (std::size_t i = 0; i < gw.cells.size(); ++i)
    if (gn.cells[i] == kCellOccupied) CHECK(gw.cells[i] == kCellOccupied);
}

TEST_CASE("empty layer without bounds is an error") {
  ProjectionParams params;
  CHECK_THROWS_AS(project_objects(ObjectLayer{}, params), Error);
  // explicit bounds make it valid: an all-free map
  const OccupancyGrid grid = project_objects(ObjectLayer{}, params, GridBounds{0, 0, 1, 1});
  for (const auto c : grid.cells) CHECK(c == kCellFree);
}

TEST_CASE("merge with an all-unknown grid preserves the input over its extent") {
  Rng rng(13);
  const OccupancyGrid a = random_grid(rng, 12, 9, 0.1, 0.0, 0.0);
  OccupancyGrid unknown = a;
  std::fill(unknown.cells.begin(), unknown.cells.end(), kCellUnknown);
  const OccupancyGrid merged = merge_grids(a, unknown);
  REQUIRE(merged.width == a.width);
  REQUIRE(merged.height == a.height);
  CHECK(merged.cells == a.cells);
}

TEST_CASE("occupied dominates free dominates unknown") {
  OccupancyGrid a, b;
  a.resolution = b.resolution = 0.1;
  a.width = b.width = 1;
  a.height = b.height = 1;
  a.cells = {kCellOccupied};
  b.cells = {kCellFree};
  CHECK(merge_grids(a, b).cells[0] == kCellOccupied);
  a.cells = {kCellFree};
  b.cells = {kCellUnknown};
  CHECK(merge_grids(a, b).cells[0] == kCellFree);
}

TEST_CASE("merge matches the cellwise oracle on offset random grids") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const OccupancyGrid a = random_grid(rng, 10 + int(rng.uniform_index(10)),
                                        8 + int(rng.uniform_index(8)), 0.05, 1.0, -2.0);
    const long long shift_x = static_cast<long long>(rng.uniform_index(12)) - 6;
    const long long shift_y = static_cast<long long>(rng.uniform_index(12)) - 6;
    const OccupancyGrid b =
        random_grid(rng, 10 + int(rng.uniform_index(10)), 8 + int(rng.uniform_index(8)), 0.05,
                    1.0 + 0.05 * shift_x, -2.0 + 0.05 * shift_y);

    const OccupancyGrid merged = merge_grids(a, b);

    // all three grids share one lattice: map merged cells by integer offsets
    const auto cell_in = [&](const OccupancyGrid& g, int ix, int iy) -> std::uint8_t {
      const long long gx = ix + llround((merged.origin_x - g.origin_x) / g.resolution);
      const long long gy = iy + llround((merged.origin_y - g.origin_y) / g.resolution);
      if (gx < 0 || gy < 0 || gx >= g.width || gy >= g.height) return kCellUnknown;
      return g.at(int(gx), int(gy));
    };
    for (int iy = 0; iy < merged.height; ++iy)
      for (int ix = 0; ix < merged.width; ++ix) {
        const std::uint8_t va = cell_in(a, ix, iy);
        const std::uint8_t vb = cell_in(b, ix, iy);
        std::uint8_t expected = kCellUnknown;
        if (va == kCellOccupied || vb == kCellOccupied)
          expected = kCellOccupied;
        else if (va == kCellFree || vb == kCellFree)
          expected = kCellFree;
        CHECK(merged.at(ix, iy) == expected);
      }
  }
}

TEST_CASE("merge is commutative and idempotent") {
  Rng rng(19);
  const OccupancyGrid a = random_grid(rng, 15, 11, 0.1, 0.0, 0.0);
  const OccupancyGrid b = random_grid(rng, 9, 14, 0.1, 0.5, -0.3);

  const OccupancyGrid ab = merge_grids(a, b);
  const OccupancyGrid ba = merge_grids(b, a);
  REQUIRE(ab.width == ba.width);
  REQUIRE(ab.height == ba.height);
  CHECK(ab.origin_x == ba.origin_x);
  CHECK(ab.origin_y == ba.origin_y);
  CHECK(ab.cells == ba.cells);

  const OccupancyGrid aa = merge_grids(a, a);
  REQUIRE(aa.width == a.width);
  CHECK(aa.cells == a.cells);
}

TEST_CASE("merge rejects mismatched lattices") {
  Rng rng(23);
  const OccupancyGrid a = random_grid(rng, 5, 5, 0.1, 0.0, 0.0);
  OccupancyGrid wrong_res = random_grid(rng, 5, 5, 0.05, 0.0, 0.0);
  CHECK_THROWS_AS(merge_grids(a, wrong_res), Error);
  OccupancyGrid off_lattice = random_grid(rng, 5, 5, 0.1, 0.033, 0.0);
  CHECK_THROWS_AS(merge_grids(a, off_lattice), Error);
}

TEST_CASE("PGM and YAML output is bit-exact") {
  oracle::TempDir dir("pgm");
  OccupancyGrid grid;
  grid.resolution = 0.05;
  grid.origin_x = -1.0;
  grid.origin_y = 2.5;
  grid.width = 3;
  grid.height = 2;
  // row iy=0 is the bottom; the PGM stores the top row first
  grid.cells = {kCellOccupied, kCellFree, kCellUnknown,   // iy = 0
                kCellFree,     kCellFree, kCellOccupied}; // iy = 1
  const std::string base = dir.file("map");
  save_grid(grid, base);

  const std::string pgm = oracle::read_file(base + ".pgm");
  // payload rows: top row first (iy = 1), embedded NUL bytes need the sized
  // string constructor
  const std::string expected_pgm =
      std::string("P5\n3 2\n255\n") + std::string("\xFE\xFE\x00\x00\xFE\xCD", 6);
  CHECK(pgm == expected_pgm);

  const std::string yaml = oracle::read_file(base + ".yaml");
  CHECK(yaml ==
        "image: map.pgm\nresolution: 0.050000\norigin: [-1.000000, 2.500000, 0.000000]\n"
        "negate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n");
}

TEST_CASE("grids round trip through PGM and YAML") {
  oracle::TempDir dir("gridrt");
  Rng rng(29);
  const OccupancyGrid grid = random_grid(rng, 21, 17, 0.05, -3.0, 1.25);
  const std::string base = dir.file("map");
  save_grid(grid, base);
  const OccupancyGrid loaded = load_grid(base + ".yaml");
  CHECK(loaded.resolution == grid.resolution);
  CHECK(loaded.origin_x == grid.origin_x);
  CHECK(loaded.origin_y == grid.origin_y);
  REQUIRE(loaded.width == grid.width);
  REQUIRE(loaded.height == grid.height);
  CHECK(loaded.cells == grid.cells);
}

TEST_CASE("projection params are validated") {
  ProjectionParams params;
  params.z_min = 1.0;
  params.z_max = 0.5;
  CHECK_THROWS_AS(project_objects(ObjectLayer{}, params, GridBounds{0, 0, 1, 1}), Error);
  params = {};
  params.resolution = 0.0;
  CHECK_THROWS_AS(project_objects(ObjectLayer{}, params, GridBounds{0, 0, 1, 1}), Error);
}
