#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "scomp/cloud_io.hpp"
#include "scomp/costmap.hpp"
#include "scomp/evalkit.hpp"
#include "scomp/modeldb.hpp"

using namespace scomp;
using scomp::cli::run_command;

namespace {

namespace fs = std::filesystem;

struct CaptureStdout {
  std::ostringstream buffer;
  std::streambuf* saved;
  CaptureStdout() : saved(std::cout.rdbuf(buffer.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(saved); }
  std::string text() const { return buffer.str(); }
};

struct RunResult {
  int code = -1;
  std::string out;
};

/// Runs the CLI with stdout captured, so test assertions stay visible.
RunResult run(std::vector<std::string> args) {
  CaptureStdout capture;
  const int code = run_command(std::move(args));
  return {code, capture.text()};
}

/// Shared pipeline fixture: a 5-model catalog, a dense world database built
/// from the same meshes (the mapped world is denser than the catalog), and a
/// two-chair scene rendered from the dense one.
struct PipelineFixture {
  oracle::TempDir dir{"cli"};
  std::string db_dir;
  std::string scene_dir;

  PipelineFixture() {
    db_dir = dir.file("db");
    const std::string meshes = dir.file("meshes");
    const std::string world_db = dir.file("world_db");
    REQUIRE(run({"db", "synth", "--out", meshes, "--count", "5", "--seed", "3"}).code == 0);
    REQUIRE(run({"db", "build", "--meshes", meshes, "--out", db_dir, "--class", "1",
                         "--db-points", "512", "--surface-samples", "4096", "--seed", "3"}).code == 0);
    REQUIRE(run({"db", "build", "--meshes", meshes, "--out", world_db, "--class", "1",
                         "--db-points", "4096", "--surface-samples", "12288", "--seed",
                         "29"}).code == 0);

    SceneSpec spec;
    spec.placements.push_back({"chair_01.obj", 0.6, 0.4, 0.9, 1.0});
    spec.placements.push_back({"chair_03.obj", 2.2, 0.9, 4.1, 1.0});
    FloorSpec floor{-0.6, 3.4, -0.8, 2.2};
    spec.clutter.floor = floor;
    spec.clutter.spacing = 0.025;
    spec.cameras.push_back({{1.4, -1.8, 1.5}, {1.4, 0.7, 0.3}});
    spec.cameras.push_back({{3.2, 2.6, 1.4}, {1.0, 0.5, 0.3}});
    spec.noise_sigma = 0.003;
    spec.label_bleed = 0.02;
    save_scene_spec(spec, dir.file("spec.json"));

    scene_dir = dir.file("scene");
    REQUIRE(run({"scene", "--spec", dir.file("spec.json"), "--db", world_db, "--out",
                         scene_dir, "--seed", "17"}).code == 0);
  }

  std::vector<std::string> complete_args(const std::string& out) const {
    return {"complete",     "--scene", scene_dir + "/semantic.ply",
            "--db",         db_dir,    "--out",
            out,            "--class", "1",
            "--lambda-min", "0.2",     "--lambda-max",
            "0.9",          "--min-points", "150",
            "--workers",    "1",       "--seed",
            "17"};
  }
};

std::string slurp(const std::string& path) { return oracle::read_file(path); }

}  // namespace

TEST_CASE("no arguments prints usage and exits 1") { CHECK(run({}).code == 1); }

TEST_CASE("unknown flags are usage errors") {
  CHECK(run({"eval", "--nonsense", "1"}).code == 1);
}

TEST_CASE("missing inputs are data errors") {
  CHECK(run({"segment", "--scene", "/nonexistent.ply", "--out", "/tmp/x"}).code == 2);
}

TEST_CASE("eval on the published counts prints the expected rates") {
  oracle::TempDir dir("evalcli");
  {
    std::ofstream counts(dir.file("counts.json"));
    counts << "{\"tp\": 11, \"fp\": 5, \"fn\": 8}\n";
  }
  const RunResult result = run({"eval", "--counts", dir.file("counts.json"), "--out",
                                dir.file("report.json")});
  CHECK(result.code == 0);
  const std::string& text = result.out;
  CHECK(text.find("0.69") != std::string::npos);
  CHECK(text.find("0.63") != std::string::npos);
  CHECK(fs::exists(dir.file("report.json")));
}

TEST_CASE("every run prints the effective configuration and seed") {
  oracle::TempDir dir("cfgprint");
  {
    std::ofstream counts(dir.file("counts.json"));
    counts << "{\"tp\": 1, \"fp\": 0, \"fn\": 0}\n";
  }
  const RunResult result = run({"eval", "--counts", dir.file("counts.json"), "--seed", "99"});
  REQUIRE(result.code == 0);
  const std::string& text = result.out;
  CHECK(text.find("# effective configuration") != std::string::npos);
  CHECK(text.find("seed = 99") != std::string::npos);
  CHECK(text.find("eval.d_match = 0.5") != std::string::npos);
}

TEST_CASE("config file values load and flags win over them") {
  oracle::TempDir dir("cfg");
  {
    std::ofstream config(dir.file("pipeline.conf"));
    config << "# comment\nepsilon = 0.25\nseed = 4\nsegmentation.lambda_max = 0.77\n";
  }
  {
    std::ofstream counts(dir.file("counts.json"));
    counts << "{\"tp\": 1, \"fp\": 0, \"fn\": 0}\n";
  }
  const RunResult result = run({"eval", "--counts", dir.file("counts.json"), "--config",
                                dir.file("pipeline.conf"), "--seed", "123"});
  REQUIRE(result.code == 0);
  const std::string& text = result.out;
  CHECK(text.find("epsilon = 0.25") != std::string::npos);
  CHECK(text.find("segmentation.lambda_max = 0.77") != std::string::npos);
  CHECK(text.find("seed = 123") != std::string::npos);  // flag beats file

  std::ofstream bad(dir.file("bad.conf"));
  bad << "unknown.key = 1\n";
  bad.close();
  CHECK(run({"eval", "--counts", dir.file("counts.json"), "--config",
             dir.file("bad.conf")}).code == 2);
}

TEST_CASE("complete pipeline on a synthesized two-chair scene") {
  PipelineFixture fx;
  const std::string out = fx.dir.file("complete");
  REQUIRE(run(fx.complete_args(out)).code == 0);

  // two placed objects and a two-record match report
  const std::vector<MatchResult> matches = read_match_report(out + "/match_report.jsonl");
  CHECK(matches.size() == 2);
  const ObjectLayer layer = load_object_layer(out + "/objects");
  CHECK(layer.objects.size() == 2);

  // the evaluation of the completed scene finds both chairs
  REQUIRE(run({"eval", "--truth", fx.scene_dir + "/truth.json", "--objects",
               out + "/objects", "--matches", out + "/match_report.jsonl", "--out",
               fx.dir.file("eval.json")}).code == 0);
  std::ifstream report(fx.dir.file("eval.json"));
  REQUIRE(report.good());
  std::stringstream ss;
  ss << report.rdbuf();
  CHECK(ss.str().find("\"tp\": 2") != std::string::npos);

  // augment and costmap run off the object layer
  REQUIRE(run({"augment", "--scene", fx.scene_dir + "/geometric.ply", "--objects",
               out + "/objects", "--out", fx.dir.file("augmented.ply"), "--epsilon",
               "0.1"}).code == 0);
  REQUIRE(run({"costmap", "--objects", out + "/objects", "--out", fx.dir.file("map"), "--zmin",
               "0.1", "--zmax", "1.0", "--resolution", "0.05"}).code == 0);
  CHECK(fs::exists(fx.dir.file("augmented.ply")));
  const OccupancyGrid grid = load_grid(fx.dir.file("map") + ".yaml");
  std::size_t occupied = 0;
  for (const auto c : grid.cells)
    if (c == kCellOccupied) ++occupied;
  CHECK(occupied > 10);

  // cardinality identity |A| = |G| - |S| + |O|
  const PointCloud g = load_cloud(fx.scene_dir + "/geometric.ply");
  const AugmentedScene augmented = load_augmented(fx.dir.file("augmented.ply"));
  std::size_t placed_points = 0;
  for (const PlacedObject& obj : layer.objects) placed_points += obj.cloud.size();
  std::size_t survivors = 0;
  for (std::uint16_t p : augmented.provenance)
    if (p == 0) ++survivors;
  CHECK(augmented.cloud.size() == survivors + placed_points);
  CHECK(augmented.cloud.size() <= g.size() + placed_points);
}

TEST_CASE("repeated runs with the same seed are byte-identical") {
  PipelineFixture fx;
  const std::string out_a = fx.dir.file("run_a");
  const std::string out_b = fx.dir.file("run_b");
  REQUIRE(run(fx.complete_args(out_a)).code == 0);
  REQUIRE(run(fx.complete_args(out_b)).code == 0);
  CHECK(slurp(out_a + "/match_report.jsonl") == slurp(out_b + "/match_report.jsonl"));
  CHECK(slurp(out_a + "/filter_report.jsonl") == slurp(out_b + "/filter_report.jsonl"));
  for (const auto& item : fs::directory_iterator(out_a + "/objects")) {
    const std::string name = item.path().filename().string();
    CHECK(slurp(item.path().string()) == slurp(out_b + "/objects/" + name));
  }
}

TEST_CASE("complete equals segment plus match") {
  PipelineFixture fx;
  const std::string whole = fx.dir.file("whole");
  const std::string steps = fx.dir.file("steps");
  REQUIRE(run(fx.complete_args(whole)).code == 0);
  REQUIRE(run({"segment", "--scene", fx.scene_dir + "/semantic.ply", "--out", steps, "--class",
               "1", "--lambda-min", "0.2", "--lambda-max", "0.9", "--min-points", "150",
               "--seed", "17"}).code == 0);
  REQUIRE(run({"match", "--db", fx.db_dir, "--clusters", steps, "--workers", "1", "--seed",
               "17"}).code == 0);
  CHECK(slurp(whole + "/filter_report.jsonl") == slurp(steps + "/filter_report.jsonl"));
  CHECK(slurp(whole + "/match_report.jsonl") == slurp(steps + "/match_report.jsonl"));
  for (const auto& item : fs::directory_iterator(whole + "/objects")) {
    const std::string name = item.path().filename().string();
    CHECK(slurp(item.path().string()) == slurp(steps + "/objects/" + name));
  }
  for (const auto& item : fs::directory_iterator(whole)) {
    const std::string name = item.path().filename().string();
    if (item.is_regular_file() && name.rfind("cluster_", 0) == 0)
      CHECK(slurp(item.path().string()) == slurp(steps + "/" + name));
  }
}

TEST_CASE("scan renders a partial view of a model") {
  PipelineFixture fx;
  const std::string model = fx.db_dir + "/models/chair_00.obj.ply";
  const std::string out = fx.dir.file("partial.ply");
  REQUIRE(run({"scan", "--model", model, "--camera", "2", "0", "1.2", "0", "0", "0.4", "--out",
               out, "--image-res", "192", "--noise-sigma", "0.002", "--seed", "5"}).code == 0);
  const PointCloud partial = load_cloud(out);
  const PointCloud full = load_cloud(model);
  CHECK(!partial.empty());
  CHECK(partial.size() < full.size());
}
