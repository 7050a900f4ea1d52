#pragma once

#include <optional>
#include <span>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/surface.hpp"

namespace radialdlt {

/// Vertices above this count are strided down before evaluating metrics.
inline constexpr size_t kMetricVertexLimit = 10000;

/// Vertices used for metric evaluation: all of them up to kMetricVertexLimit,
/// otherwise every `stride`-th one with stride = ceil(n / limit).
struct MetricPoints {
  std::vector<Vec3> points;
  size_t stride = 1;
};
MetricPoints metric_points(const TriangleMesh& mesh,
                           size_t limit = kMetricVertexLimit);

/// Mean distance between corresponding vertices under the two poses.
double add_metric(std::span<const Vec3> pts, const RigidPose& est,
                  const RigidPose& gt);
double add_metric(const TriangleMesh& mesh, const RigidPose& est,
                  const RigidPose& gt);

/// Mean distance from each est-posed vertex to the nearest gt-posed vertex.
double adds_metric(std::span<const Vec3> pts, const RigidPose& est,
                   const RigidPose& gt);
double adds_metric(const TriangleMesh& mesh, const RigidPose& est,
                   const RigidPose& gt);

/// Area under the recall-vs-threshold curve on [0, max_threshold],
/// normalised to [0, 1]. Integrates the empirical recall staircase exactly.
/// Throws kEmptyInput for no errors and kInvalidArgument for max_threshold <= 0.
double auc(std::span<const double> errors, double max_threshold = 0.1);

/// Fraction of errors strictly below `threshold`.
double recall(std::span<const double> errors, double threshold);

/// min over symmetries S of max over vertices |est(v) - gt(S v)| (meters).
/// Throws kEmptySymmetrySet for an empty set.
double mssd(std::span<const Vec3> pts, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym);
double mssd(const TriangleMesh& mesh, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym);

/// As mssd but on projected pixel positions. Throws kNonPositiveDepth when a
/// posed vertex is not in front of the camera.
double mspd(std::span<const Vec3> pts, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym,
            const CameraIntrinsics& intr);
double mspd(const TriangleMesh& mesh, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym,
            const CameraIntrinsics& intr);

/// Rotation error (radians) minimised over the object symmetries.
double rotation_error(const RigidPose& est, const RigidPose& gt,
                      const SymmetrySet& sym = {});
double translation_error(const RigidPose& est, const RigidPose& gt);

struct MetricReport {
  double add = 0.0;
  double adds = 0.0;
  bool add_recall_10pct = false;  // ADD or ADD-S (symmetric) < 0.1 diameter
  double mssd = 0.0;
  double mspd = 0.0;
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
};

/// `symmetric` selects ADD-S for the recall flag.
MetricReport evaluate_pose(const TriangleMesh& mesh, const RigidPose& est,
                           const RigidPose& gt, const SymmetrySet& sym,
                           const CameraIntrinsics& intr, bool symmetric,
                           double add_threshold_fraction = 0.1);

struct PercentileRow {
  double percentile = 0.0;
  std::optional<double> mean_error;  // meters; empty when no point qualifies
  size_t count = 0;
};

/// Per-pixel errors |est - gt| for every pixel of the estimate. Pixels outside
/// the ground-truth mask are skipped.
std::vector<double> surface_errors(const SurfaceEstimate& est,
                                   const PointImage& gt_points_obj);

/// For each percentile q the mean of the smallest ceil(q n / 100) errors. With
/// `filter_m`, errors above it are discarded first. Throws kEmptyEstimate
/// for no errors and kInvalidArgument for percentiles that are not ascending
/// within (0, 100].
std::vector<PercentileRow> surface_error_percentiles(
    std::span<const double> errors, std::span<const double> percentiles,
    std::optional<double> filter_m = std::nullopt);
std::vector<PercentileRow> surface_error_percentiles(
    const SurfaceEstimate& est, const PointImage& gt_points_obj,
    std::span<const double> percentiles,
    std::optional<double> filter_m = std::nullopt);

inline constexpr double kDefaultPercentiles[] = {10.0, 25.0, 50.0, 75.0,
                                                 100.0};

}  // namespace radialdlt
