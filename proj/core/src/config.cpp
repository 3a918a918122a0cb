#include "scomp/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "scomp/error.hpp"

namespace scomp {

MatchParams PipelineConfig::match_params() const {
  MatchParams mp;
  mp.reg = registration;
  mp.top_k = top_k;
  mp.workers = workers;
  mp.paper_coarse = paper_coarse;
  mp.seed = seed;
  mp.partial_leaf = partial_leaf;
  return mp;
}

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("config: bad numeric value '" + value + "' for " + key);
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("config: bad integer value '" + value + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw Error("config: bad boolean value '" + value + "' for " + key);
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "class_id")
    class_id = static_cast<std::uint8_t>(parse_int(key, value));
  else if (key == "seed")
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "workers")
    workers = static_cast<int>(parse_int(key, value));
  else if (key == "epsilon")
    epsilon = parse_double(key, value);
  else if (key == "segmentation.r_small")
    segmentation.r_small = parse_double(key, value);
  else if (key == "segmentation.r_large")
    segmentation.r_large = parse_double(key, value);
  else if (key == "segmentation.don_threshold")
    segmentation.don_threshold = parse_double(key, value);
  else if (key == "segmentation.cluster_gap")
    segmentation.cluster_gap = parse_double(key, value);
  else if (key == "segmentation.min_points")
    segmentation.min_points = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "segmentation.lambda_min")
    segmentation.lambda_min = parse_double(key, value);
  else if (key == "segmentation.lambda_max")
    segmentation.lambda_max = parse_double(key, value);
  else if (key == "segmentation.planarity_ratio")
    segmentation.planarity_ratio = parse_double(key, value);
  else if (key == "segmentation.planarity_abs")
    segmentation.planarity_abs = parse_double(key, value);
  else if (key == "registration.yaw_samples")
    registration.yaw_samples = static_cast<int>(parse_int(key, value));
  else if (key == "registration.max_iterations")
    registration.max_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "registration.convergence_tol")
    registration.convergence_tol = parse_double(key, value);
  else if (key == "registration.outlier_factor")
    registration.outlier_factor = parse_double(key, value);
  else if (key == "registration.grounding") {
    if (value == "partial")
      registration.grounding = Grounding::partial_extent;
    else if (value == "floor")
      registration.grounding = Grounding::floor;
    else
      throw Error("config: grounding must be 'partial' or 'floor', got '" + value + "'");
  } else if (key == "match.top_k")
    top_k = static_cast<int>(parse_int(key, value));
  else if (key == "match.paper_coarse")
    paper_coarse = parse_bool(key, value);
  else if (key == "match.partial_leaf")
    partial_leaf = parse_double(key, value);
  else if (key == "database.surface_samples")
    database.surface_samples = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "database.db_points")
    database.db_points = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "costmap.z_min")
    costmap.z_min = parse_double(key, value);
  else if (key == "costmap.z_max")
    costmap.z_max = parse_double(key, value);
  else if (key == "costmap.resolution")
    costmap.resolution = parse_double(key, value);
  else if (key == "costmap.padding")
    costmap.padding = parse_double(key, value);
  else if (key == "eval.d_match")
    d_match = parse_double(key, value);
  else
    throw Error("config: unknown key '" + key + "'");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");

  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      config.set(key, value);
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

void PipelineConfig::print(std::ostream& os) const {
  os << "class_id = " << int(class_id) << '\n';
  os << "seed = " << seed << '\n';
  os << "workers = " << workers << '\n';
  os << "epsilon = " << epsilon << '\n';
  os << "segmentation.r_small = " << segmentation.r_small << '\n';
  os << "segmentation.r_large = " << segmentation.r_large << '\n';
  os << "segmentation.don_threshold = " << segmentation.don_threshold << '\n';
  os << "segmentation.cluster_gap = " << segmentation.cluster_gap << '\n';
  os << "segmentation.min_points = " << segmentation.min_points << '\n';
  os << "segmentation.lambda_min = " << segmentation.lambda_min << '\n';
  os << "segmentation.lambda_max = " << segmentation.lambda_max << '\n';
  os << "segmentation.planarity_ratio = " << segmentation.planarity_ratio << '\n';
  os << "segmentation.planarity_abs = " << segmentation.planarity_abs << '\n';
  os << "registration.yaw_samples = " << registration.yaw_samples << '\n';
  os << "registration.max_iterations = " << registration.max_iterations << '\n';
  os << "registration.convergence_tol = " << registration.convergence_tol << '\n';
  os << "registration.outlier_factor = " << registration.outlier_factor << '\n';
  os << "registration.grounding = "
     << (registration.grounding == Grounding::floor ? "floor" : "partial") << '\n';
  os << "match.top_k = " << top_k << '\n';
  os << "match.paper_coarse = " << (paper_coarse ? "true" : "false") << '\n';
  os << "match.partial_leaf = " << partial_leaf << '\n';
  os << "database.surface_samples = " << database.surface_samples << '\n';
  os << "database.db_points = " << database.db_points << '\n';
  os << "costmap.z_min = " << costmap.z_min << '\n';
  os << "costmap.z_max = " << costmap.z_max << '\n';
  os << "costmap.resolution = " << costmap.resolution << '\n';
  os << "costmap.padding = " << costmap.padding << '\n';
  os << "eval.d_match = " << d_match << '\n';
}

}  // namespace scomp
