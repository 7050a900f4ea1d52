#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radialdlt/bvh.hpp"
#include "radialdlt/core.hpp"
#include "radialdlt/surface.hpp"

namespace radialdlt {

/// Least-squares rigid transform (scale fixed to 1) with dst_i ~ R src_i + t.
/// The determinant correction keeps det(R) = +1 for reflected inputs.
/// Throws kDimensionMismatch, kInsufficientCorrespondences for fewer than 3
/// pairs and kDegenerateConfiguration for collinear or coincident src.
RigidPose umeyama(std::span<const Vec3> src, std::span<const Vec3> dst);

struct RansacConfig {
  int max_iterations = 1000;
  double inlier_threshold = 0.005;  // meters
  int sample_size = 3;
  double min_inlier_fraction = 0.1;
  /// Adaptive early exit once (1 - w^s)^k <= 1 - confidence.
  double confidence = 0.999;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument when a field is out of range.
  void validate() const;
};

struct PoseResult {
  RigidPose pose;
  size_t inlier_count = 0;
  double inlier_rms = 0.0;  // meters, over the inliers of `pose`
  int iterations_used = 0;  // 0 when the all-points fit was already clean
  std::vector<size_t> inliers;

  friend bool operator==(const PoseResult& a, const PoseResult& b) {
    return a.pose.rotation() == b.pose.rotation() &&
           a.pose.translation() == b.pose.translation() &&
           a.inlier_count == b.inlier_count && a.inlier_rms == b.inlier_rms &&
           a.iterations_used == b.iterations_used && a.inliers == b.inliers;
  }
};

/// RANSAC over minimal samples scored by inlier count, then an Umeyama refit
/// on all inliers. Hypotheses are evaluated in fixed-size batches in parallel;
/// the winner is the lexicographic best of (inlier count, -rms, -iteration),
/// so the result does not depend on the thread count.
///
/// Throws kInsufficientCorrespondences when fewer than sample_size pairs are
/// given and kNoConsensus when the best inlier fraction is below
/// min_inlier_fraction.
PoseResult ransac_pose(std::span<const Vec3> src, std::span<const Vec3> dst,
                       const RansacConfig& cfg);
/// Object-frame estimates to camera-frame points.
PoseResult ransac_pose(const SurfaceEstimate& est, const RansacConfig& cfg);

struct IcpOptions {
  int max_iterations = 30;
  double tolerance = 1e-6;  // stop when the RMS drops by less (meters)
};

struct IcpResult {
  RigidPose pose;
  double initial_rms = 0.0;
  double final_rms = 0.0;
  int iterations = 0;
  std::vector<double> rms_history;  // initial RMS first; non-increasing
};

/// Point-to-point ICP with pose mapping src into dst. Each transformed src
/// point is matched to its nearest dst point (k-d tree). A step that would
/// raise the RMS is rejected, so final_rms <= initial_rms.
/// Throws kEmptyCloud for an empty cloud.
IcpResult icp_refine(const RigidPose& initial, std::span<const Vec3> src_cloud,
                     std::span<const Vec3> dst_cloud, IcpOptions opts = {});

/// ICP against the exact model surface: camera-frame scene points are mapped
/// into the object frame by the inverse pose and matched to their closest
/// point on the mesh. `pose` maps object to camera as usual.
IcpResult icp_refine_to_surface(const RigidPose& initial,
                                std::span<const Vec3> scene_cam,
                                const TriangleBvh& model_bvh,
                                IcpOptions opts = {});

}  // namespace radialdlt
