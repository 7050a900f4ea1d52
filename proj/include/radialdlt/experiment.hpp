#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/dlt.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/metrics.hpp"
#include "radialdlt/posefit.hpp"

namespace radialdlt {

/// Where the synthetic noise goes: object-frame surface estimates after the
/// DLT, or the radial maps before it.
enum class NoiseTarget { kSurface, kRadial };

std::string to_string(NoiseTarget t);
NoiseTarget noise_target_from_string(const std::string& s);

struct PoseSampling {
  int count = 50;
  std::uint64_t seed = 1;
  double z_min = 0.6;  // meters
  double z_max = 1.0;
  double margin_px = 8.0;
};

/// Rotations uniform over SO(3); translations uniform in the depth range and
/// the image-plane box, redrawn until every vertex projects inside the image
/// with the given margin. Throws kInvalidArgument if no placement fits.
std::vector<RigidPose> sample_poses(const TriangleMesh& mesh,
                                    const CameraIntrinsics& intr,
                                    const PoseSampling& s);

struct ExperimentOptions {
  CameraIntrinsics intrinsics = CameraIntrinsics::linemod();
  std::vector<double> sigmas_mm{0.0};
  NoiseTarget noise_target = NoiseTarget::kSurface;
  std::uint64_t seed = 1;
  RansacConfig ransac;
  /// Inlier threshold used at noise sigma: max(ransac.inlier_threshold,
  /// factor * sigma).
  double ransac_sigma_factor = 3.0;
  bool icp = true;
  IcpOptions icp_options{30, 1e-9};
  DltOptions dlt;
  /// Object symmetry handling: ADD-S for the recall flag.
  bool symmetric_object = false;
  double add_threshold_fraction = 0.1;
  /// Recall grids (fractions of the diameter / pixels scaled by width/640).
  std::vector<double> mssd_grid{0.05, 0.10, 0.15, 0.20, 0.25,
                                0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<double> mspd_grid{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
};

struct PoseMetrics {
  MetricReport report;
  double mssd_recall = 0.0;  // mean recall over the MSSD grid (0 or 1 here)
  double mspd_recall = 0.0;
};

struct FrameResult {
  int frame = 0;
  double sigma_mm = 0.0;
  bool ok = false;
  std::string failure;
  size_t mask_pixels = 0;
  size_t solved_pixels = 0;
  double recovery_error_m = 0.0;  // mean |estimate - ground truth| point error
  size_t inliers = 0;
  PoseMetrics without_icp;
  std::optional<PoseMetrics> with_icp;
};

struct VariantSummary {
  double mean_rotation_error_deg = 0.0;
  double median_rotation_error_deg = 0.0;
  double mean_translation_error_m = 0.0;
  double median_translation_error_m = 0.0;
  double mean_add = 0.0;
  double median_add = 0.0;
  double mean_adds = 0.0;
  double mean_mssd = 0.0;
  double median_mssd = 0.0;
  double mean_mspd = 0.0;
  double add_recall = 0.0;  // over all frames; failures count as misses
  double auc_adds = 0.0;
  double mssd_recall = 0.0;
  double mspd_recall = 0.0;
};

struct SigmaSummary {
  double sigma_mm = 0.0;
  int frames = 0;
  int succeeded = 0;
  double mean_recovery_error_m = 0.0;
  VariantSummary without_icp;
  std::optional<VariantSummary> with_icp;
};

struct ExperimentResult {
  std::vector<FrameResult> frames;  // frame-major, then sigma order
  std::vector<SigmaSummary> summaries;
  size_t metric_stride = 1;
};

/// Runs render -> radial maps -> noise -> DLT -> RANSAC (-> ICP) -> metrics
/// for every pose and sigma. Each frame is rendered once; all sigmas reuse
/// the same per-frame random stream, so noise at sigma b is (b/a) times the
/// noise at sigma a. Frames run in parallel; results are in input order.
/// Per-frame failures are recorded, never thrown.
ExperimentResult run_experiment(const TriangleMesh& mesh,
                                const KeypointSet& kps,
                                const std::vector<RigidPose>& poses,
                                const ExperimentOptions& opts);

struct AblationRow {
  int n_k = 0;
  SigmaSummary summary;
};

/// Farthest-point keypoints with each count in `nk_grid`, one experiment per
/// count, using the first sigma of opts.
std::vector<AblationRow> run_keypoint_ablation(
    const TriangleMesh& mesh, const std::vector<RigidPose>& poses,
    const std::vector<int>& nk_grid, const ExperimentOptions& opts);

// Output writers. CSV cells use shortest round-trip decimal text.
std::string frames_csv(const ExperimentResult& r);
std::string sweep_csv(const ExperimentResult& r);
std::string summary_json(const ExperimentResult& r);
std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Fraction of frames at sigma = 0 (or the smallest sigma) that succeeded.
double baseline_success_rate(const ExperimentResult& r);

}  // namespace radialdlt
