#pragma once

#include <utility>
#include <vector>

#include "scomp/geometry.hpp"
#include "scomp/kdtree.hpp"
#include "scomp/segmentation.hpp"

namespace scomp {

/// How partials and placed models relate to the ground plane.
/// partial_extent: the partial's own lowest point defines ground contact.
/// floor: world z is height above the floor plane z = 0 and is preserved.
enum class Grounding { partial_extent, floor };

struct RegistrationParams {
  int yaw_samples = 36;
  int max_iterations = 50;
  double convergence_tol = 1e-6;  // meters of residual improvement
  double outlier_factor = 2.5;    // reject correspondences beyond factor * median
  Grounding grounding = Grounding::partial_extent;

  void validate() const;
};

/// Result of aligning a canonical model to a normalized partial.
struct Alignment {
  GroundedTransform transform;           // model canonical frame -> partial local frame
  double delta = 0.0;                    // final mean directed distance, meters
  std::vector<double> residual_history;  // non-increasing after the first entry
  int iterations = 0;
};

/// Translates the cluster so its xy-centroid is at the origin; in
/// partial_extent mode also drops its minimum z to 0, in floor mode world z is
/// kept. Returns the local cloud plus the inverse (local -> world) transform.
std::pair<PointCloud, GroundedTransform> normalize_partial(const Cluster& cluster,
                                                           Grounding grounding);

/// Scale estimate: the larger of the farthest-point ratio and the z-extent
/// ratio, clamped to [0.5, 2.0]. The two agree on complete partials; the
/// height ratio covers cropped partials, whose shifted centroid biases the
/// farthest-point statistic. Errors when the model has zero extent.
double initial_scale(const PointCloud& partial, const PointCloud& model);

/// Sweeps yaw_samples uniform rotations. Each hypothesis starts from the
/// initial scale and translation seeds aligning the xy-centroids and the
/// footprint corners (z offset 0), settles its translation with a few
/// fixed-yaw correspondence steps on the shared ground plane, and is scored
/// by the model distance; ties go to the smallest yaw. The leading lattice
/// hypotheses are then refined at full resolution (yaw freed, scale picked by
/// a direct line search) and the best refined transform is returned.
GroundedTransform coarse_align(const PointCloud& model, const PointCloud& partial,
                               const RegistrationParams& params);
GroundedTransform coarse_align(const NeighborIndex& model, const PointCloud& partial,
                               const RegistrationParams& params);

/// Iterative closest point constrained to yaw + translation (scale frozen):
/// correspondences by nearest transformed-model point per partial point,
/// rejection beyond outlier_factor * median distance, closed-form yaw from 2D
/// Procrustes on xy and translation from inlier centroid difference. Stops on
/// residual improvement below convergence_tol, on max_iterations, or when a
/// step fails to improve the residual (the step is dropped, keeping the
/// history non-increasing). Residuals are computed over all partial points.
Alignment icp_refine(const PointCloud& model, const PointCloud& partial,
                     const GroundedTransform& t0, const RegistrationParams& params);
Alignment icp_refine(const NeighborIndex& model, const PointCloud& partial,
                     const GroundedTransform& t0, const RegistrationParams& params);

/// Mean directed distance from each partial point to the closest transformed
/// model point (partial -> model; model completeness is not penalized).
/// Exact coincidence yields an exact zero.
double model_distance(const PointCloud& model, const PointCloud& partial,
                      const GroundedTransform& t);

}  // namespace scomp
