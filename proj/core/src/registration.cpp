#include "scomp/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "scomp/error.hpp"

namespace scomp {

void RegistrationParams::validate() const {
  if (yaw_samples < 4) throw Error("registration params: yaw_samples must be >= 4");
  if (max_iterations < 1) throw Error("registration params: max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw Error("registration params: convergence_tol must be positive");
  if (!(outlier_factor > 0.0)) throw Error("registration params: outlier_factor must be positive");
}

namespace {

Point3 span_centroid(std::span<const Point3> pts) {
  Point3 c;
  for (const Point3& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

double span_lambda(std::span<const Point3> pts) {
  const Point3 c = span_centroid(pts);
  double best = 0.0;
  for (const Point3& p : pts) best = std::max(best, distance(p, c));
  return best;
}

double z_extent(std::span<const Point3> pts) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point3& p : pts) {
    lo = std::min(lo, p.z);
    hi = std::max(hi, p.z);
  }
  return hi - lo;
}

// lambda ratio, backed up by the height ratio: cropping shifts the centroid
// and biases lambda by several percent, while grounded partials usually keep
// the full z extent. For complete partials the two statistics agree.
double scale_estimate(std::span<const Point3> partial, std::span<const Point3> model) {
  const double lambda_model = span_lambda(model);
  if (!(lambda_model > 0.0)) throw Error("initial_scale: model has zero extent");
  double s = span_lambda(partial) / lambda_model;
  const double height_model = z_extent(model);
  if (height_model > 1e-9) s = std::max(s, z_extent(partial) / height_model);
  return std::clamp(s, 0.5, 2.0);
}

// Mean directed distance, evaluated in the model's canonical frame:
// |p - T(q)| == scale * |T^-1(p) - q|, so one prebuilt model index serves
// every candidate transform.
double directed_distance(const NeighborIndex& model, const PointCloud& partial,
                         const GroundedTransform& t) {
  const GroundedTransform inv = t.inverse();
  double sum = 0.0;
  for (const Point3& p : partial.points) sum += model.nearest(inv.apply(p)).distance;
  return t.scale * sum / static_cast<double>(partial.size());
}

double lower_median(std::vector<double> values) {
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

// Settling of a coarse hypothesis. Centroid alignment alone misplaces
// cropped partials by their centroid shift, and the global size statistics
// behind initial_scale are biased by cropping; both corrupt the
// delta-vs-yaw landscape. Each step recomputes correspondences and solves,
// in closed form over the inliers: translation (step 0), scale + translation
// (later steps), and optionally yaw as a full 2D similarity (winner polish).
// The scale stays clamped to the initial_scale range.
void settle_pose(const NeighborIndex& model, const PointCloud& partial, GroundedTransform& t,
                 double outlier_factor, int steps, bool fit_yaw = false, bool fit_scale = true,
                 bool fix_z = false) {
  const std::span<const Point3> model_pts = model.points();
  std::vector<std::size_t> corr(partial.size());
  std::vector<double> dist(partial.size());

  for (int step = 0; step < steps; ++step) {
    const GroundedTransform inv = t.inverse();
    for (std::size_t i = 0; i < partial.size(); ++i) {
      const NeighborIndex::Hit hit = model.nearest(inv.apply(partial.points[i]));
      corr[i] = hit.index;
      dist[i] = t.scale * hit.distance;
    }
    const double threshold = outlier_factor * lower_median(dist);

    Point3 mean_partial, mean_model;
    std::size_t inliers = 0;
    for (std::size_t i = 0; i < partial.size(); ++i) {
      if (dist[i] > threshold) continue;
      mean_partial += partial.points[i];
      mean_model += model_pts[corr[i]];
      ++inliers;
    }
    if (inliers == 0) return;
    mean_partial = mean_partial / static_cast<double>(inliers);
    mean_model = mean_model / static_cast<double>(inliers);

    if (step > 0 && (fit_yaw || fit_scale)) {
      double sxx = 0.0, sxy = 0.0, szz = 0.0, norm2 = 0.0;
      for (std::size_t i = 0; i < partial.size(); ++i) {
        if (dist[i] > threshold) continue;
        const Point3 a = model_pts[corr[i]] - mean_model;
        const Point3 b = partial.points[i] - mean_partial;
        sxx += a.x * b.x + a.y * b.y;
        sxy += a.x * b.y - a.y * b.x;
        szz += a.z * b.z;
        norm2 += a.dot(a);
      }
      if (fit_yaw && (sxx != 0.0 || sxy != 0.0)) t.yaw = normalized_yaw(std::atan2(sxy, sxx));
      if (fit_scale) {
        // least-squares uniform scale for the current yaw
        const double c = std::cos(t.yaw);
        const double s = std::sin(t.yaw);
        const double dot = c * sxx + s * sxy + szz;
        if (norm2 > 0.0 && dot > 0.0) t.scale = std::clamp(dot / norm2, 0.5, 2.0);
      }
    }
    const double keep_z = t.translation.z;
    t.translation = mean_partial - t.rotate(mean_model) * t.scale;
    if (fix_z) t.translation.z = keep_z;
  }
}

}  // namespace

std::pair<PointCloud, GroundedTransform> normalize_partial(const Cluster& cluster,
                                                           Grounding grounding) {
  if (cluster.cloud.empty()) throw Error("normalize_partial: empty cluster");

  const Point3 c = centroid(cluster.cloud);
  double offset_z = 0.0;
  if (grounding == Grounding::partial_extent) {
    offset_z = std::numeric_limits<double>::infinity();
    for (const Point3& p : cluster.cloud.points) offset_z = std::min(offset_z, p.z);
  }
  const Point3 offset{c.x, c.y, offset_z};

  PointCloud local = cluster.cloud;
  for (Point3& p : local.points) p -= offset;

  GroundedTransform to_world;
  to_world.translation = offset;
  return {std::move(local), to_world};
}

double initial_scale(const PointCloud& partial, const PointCloud& model) {
  if (partial.empty() || model.empty()) throw Error("initial_scale: empty cloud");
  return scale_estimate(std::span(partial.points), std::span(model.points));
}

namespace {

struct FootprintBox {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

// 2nd/98th percentile footprint, robust to a few mislabeled points.
FootprintBox robust_footprint(std::span<const Point3> pts) {
  std::vector<double> xs(pts.size()), ys(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    xs[i] = pts[i].x;
    ys[i] = pts[i].y;
  }
  const std::size_t lo = (pts.size() - 1) * 2 / 100;
  const std::size_t hi = (pts.size() - 1) * 98 / 100;
  const auto pick = [](std::vector<double>& v, std::size_t nth) {
    std::nth_element(v.begin(), v.begin() + nth, v.end());
    return v[nth];
  };
  FootprintBox box;
  box.x0 = pick(xs, lo);
  box.x1 = pick(xs, hi);
  box.y0 = pick(ys, lo);
  box.y1 = pick(ys, hi);
  return box;
}

}  // namespace

namespace {

constexpr std::size_t kSiftPoints = 64;      // first-pass subsample over every hypothesis
constexpr std::size_t kSweepPoints = 256;    // second-pass subsample over the leading yaws
constexpr std::size_t kRefinePoints = 1024;  // subsample for hypothesis refinement
constexpr int kSiftSettleSteps = 2;
constexpr int kSweepSettleSteps = 3;
constexpr int kWinnerSettleSteps = 10;
constexpr int kSecondPassYaws = 12;
constexpr int kRefineCandidates = 4;

PointCloud stride_subsample(const PointCloud& cloud, std::size_t target) {
  if (cloud.size() <= target) return cloud;
  const std::size_t stride = (cloud.size() + target - 1) / target;
  PointCloud out;
  out.points.reserve(cloud.size() / stride + 1);
  for (std::size_t i = 0; i < cloud.size(); i += stride) out.points.push_back(cloud.points[i]);
  return out;
}

}  // namespace

GroundedTransform coarse_align(const NeighborIndex& model, const PointCloud& partial,
                               const RegistrationParams& params) {
  params.validate();
  if (partial.empty()) throw Error("coarse_align: empty partial");
  if (model.size() == 0) throw Error("coarse_align: empty model");

  const double scale = scale_estimate(std::span(partial.points), model.points());
  const Point3 c_partial = span_centroid(std::span(partial.points));
  const Point3 c_model = span_centroid(model.points());
  const FootprintBox partial_box = robust_footprint(std::span(partial.points));
  const PointCloud sift = stride_subsample(partial, kSiftPoints);
  const PointCloud sweep = stride_subsample(partial, kSweepPoints);
  const PointCloud refine_cloud = stride_subsample(partial, kRefinePoints);

  // pass 1: one cheaply settled hypothesis per lattice yaw
  struct Hypothesis {
    GroundedTransform t;
    double score = std::numeric_limits<double>::infinity();
    int lattice = 0;
  };
  std::vector<Hypothesis> ranked(params.yaw_samples);
  std::vector<Point3> rotated_model(model.size());
  std::vector<Point3> seeds;

  for (int k = 0; k < params.yaw_samples; ++k) {
    GroundedTransform hypothesis;
    hypothesis.yaw = normalized_yaw(kTwoPi * k / params.yaw_samples);
    hypothesis.scale = scale;
    ranked[k].lattice = k;

    // translation seeds: aligned xy-centroids, plus the four footprint corner
    // anchors. A one-sided crop keeps three of the four footprint edges, so
    // one anchor pair is close to the true translation even when the
    // centroid-aligned seed is off by the crop's centroid shift.
    for (std::size_t i = 0; i < model.size(); ++i)
      rotated_model[i] = hypothesis.rotate(model.points()[i]) * scale;
    const FootprintBox model_box = robust_footprint(std::span(rotated_model));
    const Point3 rotated_centroid = hypothesis.rotate(c_model) * scale;

    seeds.clear();
    seeds.push_back({c_partial.x - rotated_centroid.x, c_partial.y - rotated_centroid.y, 0.0});
    for (const double tx : {partial_box.x0 - model_box.x0, partial_box.x1 - model_box.x1})
      for (const double ty : {partial_box.y0 - model_box.y0, partial_box.y1 - model_box.y1}) {
        const Point3 seed{tx, ty, 0.0};
        bool duplicate = false;
        for (const Point3& s : seeds)
          if (distance(s, seed) < 0.01) duplicate = true;
        if (!duplicate) seeds.push_back(seed);
      }

    for (const Point3& seed : seeds) {
      GroundedTransform t = hypothesis;
      t.translation = seed;
      settle_pose(model, sift, t, params.outlier_factor, kSiftSettleSteps,
                  /*fit_yaw=*/false, /*fit_scale=*/false, /*fix_z=*/true);
      const double delta = directed_distance(model, sift, t);
      if (delta < ranked[k].score) {  // strict: ties keep the first seed
        ranked[k].score = delta;
        ranked[k].t = t;
      }
    }
  }

  const auto by_score = [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.lattice < b.lattice;  // ties toward the smallest yaw
  };
  std::sort(ranked.begin(), ranked.end(), by_score);

  // pass 2: re-settle and re-score the leading yaws at a finer subsample
  const int second = std::min<int>(kSecondPassYaws, static_cast<int>(ranked.size()));
  for (int r = 0; r < second; ++r) {
    settle_pose(model, sweep, ranked[r].t, params.outlier_factor, kSweepSettleSteps,
                /*fit_yaw=*/false, /*fit_scale=*/false, /*fix_z=*/true);
    ranked[r].score = directed_distance(model, sweep, ranked[r].t);
  }
  std::sort(ranked.begin(), ranked.begin() + second, by_score);

  // pass 3: refine the best hypotheses with yaw freed, then pick the scale by
  // a direct two-stage line search on delta (least-squares scale fits are
  // biased by nearest-neighbor selection on cropped partials)
  GroundedTransform best;
  double best_delta = std::numeric_limits<double>::infinity();
  const int refine = std::min<int>(kRefineCandidates, second);
  for (int r = 0; r < refine; ++r) {
    GroundedTransform t = ranked[r].t;
    settle_pose(model, refine_cloud, t, params.outlier_factor, kWinnerSettleSteps,
                /*fit_yaw=*/true, /*fit_scale=*/false, /*fix_z=*/true);

    GroundedTransform best_scaled = t;
    double best_scaled_delta = directed_distance(model, refine_cloud, t);
    const auto try_scale = [&](double scale_value) {
      GroundedTransform scaled = best_scaled;
      scaled.scale = std::clamp(scale_value, 0.5, 2.0);
      settle_pose(model, refine_cloud, scaled, params.outlier_factor, 2,
                  /*fit_yaw=*/false, /*fit_scale=*/false, /*fix_z=*/true);
      const double delta = directed_distance(model, refine_cloud, scaled);
      if (delta < best_scaled_delta) {
        best_scaled_delta = delta;
        best_scaled = scaled;
      }
    };
    const double s0 = t.scale;
    for (int step = -3; step <= 3; ++step)
      if (step != 0) try_scale(s0 * (1.0 + 0.04 * step));
    const double s1 = best_scaled.scale;
    try_scale(s1 * (1.0 - 0.015));
    try_scale(s1 * (1.0 + 0.015));

    settle_pose(model, refine_cloud, best_scaled, params.outlier_factor, 4,
                /*fit_yaw=*/true, /*fit_scale=*/false, /*fix_z=*/true);
    const double delta = directed_distance(model, refine_cloud, best_scaled);
    if (delta < best_delta) {
      best_delta = delta;
      best = best_scaled;
    }
  }
  return best;
}

GroundedTransform coarse_align(const PointCloud& model, const PointCloud& partial,
                               const RegistrationParams& params) {
  return coarse_align(NeighborIndex(model), partial, params);
}

Alignment icp_refine(const NeighborIndex& model, const PointCloud& partial,
                     const GroundedTransform& t0, const RegistrationParams& params) {
  params.validate();
  if (partial.empty()) throw Error("icp_refine: empty partial");
  if (model.size() == 0) throw Error("icp_refine: empty model");

  const std::span<const Point3> model_pts = model.points();

  Alignment result;
  result.transform = t0;
  result.transform.yaw = normalized_yaw(t0.yaw);
  result.delta = directed_distance(model, partial, result.transform);
  result.residual_history.push_back(result.delta);

  for (int it = 1; it <= params.max_iterations; ++it) {
    result.iterations = it;

    // correspondences under the current transform
    const GroundedTransform inv = result.transform.inverse();
    std::vector<std::size_t> corr(partial.size());
    std::vector<double> dist(partial.size());
    for (std::size_t i = 0; i < partial.size(); ++i) {
      const NeighborIndex::Hit hit = model.nearest(inv.apply(partial.points[i]));
      corr[i] = hit.index;
      dist[i] = result.transform.scale * hit.distance;
    }

    const double threshold = params.outlier_factor * lower_median(dist);
    const double s = result.transform.scale;

    // closed-form yaw + translation over inliers, scale frozen
    Point3 mean_model, mean_partial;
    std::size_t inliers = 0;
    for (std::size_t i = 0; i < partial.size(); ++i) {
      if (dist[i] > threshold) continue;
      mean_model += model_pts[corr[i]] * s;
      mean_partial += partial.points[i];
      ++inliers;
    }
    if (inliers == 0) throw Error("icp_refine: all correspondences rejected (degenerate overlap)");
    mean_model = mean_model / static_cast<double>(inliers);
    mean_partial = mean_partial / static_cast<double>(inliers);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < partial.size(); ++i) {
      if (dist[i] > threshold) continue;
      const double ax = model_pts[corr[i]].x * s - mean_model.x;
      const double ay = model_pts[corr[i]].y * s - mean_model.y;
      const double bx = partial.points[i].x - mean_partial.x;
      const double by = partial.points[i].y - mean_partial.y;
      sxx += ax * bx + ay * by;
      sxy += ax * by - ay * bx;
    }

    GroundedTransform next = result.transform;
    if (sxx != 0.0 || sxy != 0.0) next.yaw = normalized_yaw(std::atan2(sxy, sxx));
    const double c = std::cos(next.yaw);
    const double sn = std::sin(next.yaw);
    next.translation = {mean_partial.x - (c * mean_model.x - sn * mean_model.y),
                        mean_partial.y - (sn * mean_model.x + c * mean_model.y),
                        mean_partial.z - mean_model.z};

    const double residual = directed_distance(model, partial, next);
    if (residual > result.delta) break;  // step did not improve; keep the previous pose

    const double improvement = result.delta - residual;
    result.transform = next;
    result.delta = residual;
    result.residual_history.push_back(residual);
    if (improvement < params.convergence_tol) break;
  }
  return result;
}

Alignment icp_refine(const PointCloud& model, const PointCloud& partial,
                     const GroundedTransform& t0, const RegistrationParams& params) {
  return icp_refine(NeighborIndex(model), partial, t0, params);
}

double model_distance(const PointCloud& model, const PointCloud& partial,
                      const GroundedTransform& t) {
  if (partial.empty()) throw Error("model_distance: empty partial");
  if (model.empty()) throw Error("model_distance: empty model");

  // evaluated on the transformed model directly: exact coincidence yields an
  // exact zero, and the value matches an exhaustive double loop bit for bit
  PointCloud placed;
  placed.points.reserve(model.size());
  for (const Point3& q : model.points) placed.points.push_back(t.apply(q));
  const NeighborIndex index(placed);

  double sum = 0.0;
  for (const Point3& p : partial.points) sum += index.nearest(p).distance;
  return sum / static_cast<double>(partial.size());
}

}  // namespace scomp
