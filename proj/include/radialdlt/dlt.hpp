#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "radialdlt/core.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/surface.hpp"

namespace radialdlt {

using DltMatrix = Eigen::Matrix<double, Eigen::Dynamic, 5>;

/// Rows [-2x_k, -2y_k, -2z_k, 1, |k|^2 - r^2] with keypoints converted from
/// meters to decimeters to match the radials. Throws kTooFewKeypoints for
/// fewer than 4 keypoints, kDimensionMismatch for a length mismatch and
/// kInvalidArgument for negative or non-finite radials.
DltMatrix build_dlt_matrix(std::span<const Vec3> keypoints_m,
                           std::span<const double> radials_dm);
DltMatrix build_dlt_matrix(const KeypointSet& kps,
                           std::span<const double> radials_dm);

struct DltOptions {
  /// Assumed radial noise (dm); scales the scale-slot consistency tolerance.
  double radial_sigma_dm = 0.05;
  /// Accept solutions that fail the scale-slot consistency test.
  bool keep_inconsistent = false;
};

struct PixelSolution {
  Vec3 point_obj = Vec3::Zero();  // meters
  double residual = 0.0;          // smallest singular value
  double scale_gap = 0.0;         // |v4 - |v1:3|^2| in dm^2
};

/// |v4 - |v1:3|^2| bound in dm^2: max(1e-6, 3 sigma (|v1:3| + max r)).
double consistency_tolerance(double sigma_dm, double point_norm_dm,
                             double max_radial_dm);

/// Per-pixel solver bound to one keypoint set. The coplanarity check runs
/// once at construction (kCoplanarKeypoints).
class DltSolver {
 public:
  explicit DltSolver(const KeypointSet& kps, DltOptions opts = {});

  /// Throws kDegenerateScale when the 5th singular-vector component is below
  /// 1e-12 in magnitude and kInconsistentSolution when the consistency test
  /// fails (unless keep_inconsistent).
  PixelSolution solve(std::span<const double> radials_dm) const;

  /// Non-throwing variant; `why` receives the error code on failure.
  std::optional<PixelSolution> try_solve(std::span<const double> radials_dm,
                                         ErrorCode* why = nullptr) const;

  size_t keypoint_count() const { return keypoints_.size(); }

 private:
  std::vector<Vec3> keypoints_;
  DltOptions opts_;
};

PixelSolution solve_pixel(const KeypointSet& kps,
                          std::span<const double> radials_dm,
                          DltOptions opts = {});

struct SolveStats {
  size_t mask_pixels = 0;
  size_t solved = 0;
  size_t skipped_degenerate = 0;
  size_t skipped_inconsistent = 0;
  size_t skipped_no_depth = 0;
  size_t skipped_invalid = 0;

  size_t skipped() const {
    return skipped_degenerate + skipped_inconsistent + skipped_no_depth +
           skipped_invalid;
  }
};

struct SurfaceSolve {
  SurfaceEstimate estimate;
  SolveStats stats;
};

/// Solves every in-mask pixel (in parallel) and pairs each solution with the
/// depth back-projection of the same pixel. Failed pixels are skipped and
/// counted. Output is in row-major pixel order regardless of thread count.
///
/// Throws kEmptyMask for an empty stack mask and kDimensionMismatch when the
/// channel count or image sizes disagree.
SurfaceSolve solve_surface(const RadialMapStack& stack, const KeypointSet& kps,
                           const DepthImage& depth,
                           const CameraIntrinsics& intr, DltOptions opts = {});

}  // namespace radialdlt
