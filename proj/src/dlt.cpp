#include "radialdlt/dlt.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "radialdlt/parallel.hpp"

namespace radialdlt {
namespace {

constexpr double kMinScale = 1e-12;

void check_inputs(size_t n_kps, std::span<const double> radials) {
  if (n_kps < 4) {
    throw Error(ErrorCode::kTooFewKeypoints,
                "DLT needs at least 4 keypoints, got " + std::to_string(n_kps));
  }
  if (radials.size() != n_kps) {
    throw Error(ErrorCode::kDimensionMismatch,
                "radial count differs from keypoint count");
  }
  for (double r : radials) {
    if (!std::isfinite(r) || r < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "radials must be finite and non-negative");
    }
  }
}

}  // namespace

DltMatrix build_dlt_matrix(std::span<const Vec3> keypoints_m,
                           std::span<const double> radials_dm) {
  check_inputs(keypoints_m.size(), radials_dm);
  DltMatrix a(static_cast<Eigen::Index>(keypoints_m.size()), 5);
  for (size_t j = 0; j < keypoints_m.size(); ++j) {
    const Vec3 k = kDecimetersPerMeter * keypoints_m[j];
    const double r = radials_dm[j];
    const auto row = static_cast<Eigen::Index>(j);
    a(row, 0) = -2.0 * k.x();
    a(row, 1) = -2.0 * k.y();
    a(row, 2) = -2.0 * k.z();
    a(row, 3) = 1.0;
    a(row, 4) = k.squaredNorm() - r * r;
  }
  return a;
}

DltMatrix build_dlt_matrix(const KeypointSet& kps,
                           std::span<const double> radials_dm) {
  return build_dlt_matrix(std::span<const Vec3>(kps.points), radials_dm);
}

double consistency_tolerance(double sigma_dm, double point_norm_dm,
                             double max_radial_dm) {
  return std::max(1e-6, 3.0 * sigma_dm * (point_norm_dm + max_radial_dm));
}

DltSolver::DltSolver(const KeypointSet& kps, DltOptions opts)
    : keypoints_(kps.points), opts_(opts) {
  if (keypoints_.size() < 4) {
    throw Error(ErrorCode::kTooFewKeypoints,
                "DLT needs at least 4 keypoints, got " +
                    std::to_string(keypoints_.size()));
  }
  if (coplanarity_measure(keypoints_) <= kCoplanarityThreshold) {
    throw Error(ErrorCode::kCoplanarKeypoints,
                "keypoints are coplanar; the DLT system is rank deficient");
  }
  if (!(opts_.radial_sigma_dm >= 0.0)) {
    throw Error(ErrorCode::kNegativeSigma, "radial sigma must be >= 0");
  }
}

std::optional<PixelSolution> DltSolver::try_solve(
    std::span<const double> radials_dm, ErrorCode* why) const {
  const DltMatrix a = build_dlt_matrix(keypoints_, radials_dm);
  const Eigen::JacobiSVD<DltMatrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Matrix<double, 5, 1> v = svd.matrixV().col(4);
  if (std::abs(v[4]) < kMinScale) {
    if (why) *why = ErrorCode::kDegenerateScale;
    return std::nullopt;
  }
  const Eigen::Matrix<double, 5, 1> x = v / v[4];
  const Vec3 p_dm = x.head<3>();
  PixelSolution out;
  out.point_obj = p_dm / kDecimetersPerMeter;
  // With exactly 4 rows the fifth singular value is structurally zero.
  out.residual = sv.size() >= 5 ? sv[4] : 0.0;
  out.scale_gap = std::abs(x[3] - p_dm.squaredNorm());
  const double max_r = *std::max_element(radials_dm.begin(), radials_dm.end());
  const double tol =
      consistency_tolerance(opts_.radial_sigma_dm, p_dm.norm(), max_r);
  if (!(out.scale_gap <= tol) && !opts_.keep_inconsistent) {
    if (why) *why = ErrorCode::kInconsistentSolution;
    return std::nullopt;
  }
  if (!out.point_obj.allFinite()) {
    if (why) *why = ErrorCode::kDegenerateScale;
    return std::nullopt;
  }
  return out;
}

PixelSolution DltSolver::solve(std::span<const double> radials_dm) const {
  ErrorCode why = ErrorCode::kInvalidArgument;
  auto s = try_solve(radials_dm, &why);
  if (!s) {
    throw Error(why, why == ErrorCode::kDegenerateScale
                         ? "DLT solution lies at infinity"
                         : "DLT solution fails the scale-slot check");
  }
  return *s;
}

PixelSolution solve_pixel(const KeypointSet& kps,
                          std::span<const double> radials_dm,
                          DltOptions opts) {
  return DltSolver(kps, opts).solve(radials_dm);
}

SurfaceSolve solve_surface(const RadialMapStack& stack, const KeypointSet& kps,
                           const DepthImage& depth,
                           const CameraIntrinsics& intr, DltOptions opts) {
  if (static_cast<size_t>(stack.channels) != kps.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "radial stack has " + std::to_string(stack.channels) +
                    " channels for " + std::to_string(kps.size()) +
                    " keypoints");
  }
  if (depth.width != stack.width || depth.height != stack.height ||
      stack.mask.width() != stack.width ||
      stack.mask.height() != stack.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "radial stack, mask and depth image sizes differ");
  }
  std::vector<size_t> pixels;
  for (size_t i = 0; i < stack.mask.size(); ++i) {
    if (stack.mask.at_index(i)) pixels.push_back(i);
  }
  if (pixels.empty()) {
    throw Error(ErrorCode::kEmptyMask, "radial stack mask is empty");
  }
  const DltSolver solver(kps, opts);
  const size_t c = kps.size();

  enum class Outcome : std::uint8_t { kOk, kDegenerate, kInconsistent,
                                      kNoDepth, kInvalid };
  std::vector<Outcome> outcome(pixels.size(), Outcome::kOk);
  std::vector<PixelSolution> sol(pixels.size());
  parallel_for(pixels.size(), [&](size_t k) {
    const size_t i = pixels[k];
    if (!(depth.depth[i] > 0.0)) {
      outcome[k] = Outcome::kNoDepth;
      return;
    }
    const std::span<const double> r(stack.values.data() + i * c, c);
    if (!std::all_of(r.begin(), r.end(),
                     [](double x) { return std::isfinite(x) && x >= 0.0; })) {
      outcome[k] = Outcome::kInvalid;
      return;
    }
    ErrorCode why = ErrorCode::kInvalidArgument;
    auto s = solver.try_solve(r, &why);
    if (s) {
      sol[k] = *s;
    } else {
      outcome[k] = why == ErrorCode::kInconsistentSolution
                       ? Outcome::kInconsistent
                       : Outcome::kDegenerate;
    }
  });

  SurfaceSolve out;
  out.stats.mask_pixels = pixels.size();
  for (size_t k = 0; k < pixels.size(); ++k) {
    switch (outcome[k]) {
      case Outcome::kDegenerate: ++out.stats.skipped_degenerate; continue;
      case Outcome::kInconsistent: ++out.stats.skipped_inconsistent; continue;
      case Outcome::kNoDepth: ++out.stats.skipped_no_depth; continue;
      case Outcome::kInvalid: ++out.stats.skipped_invalid; continue;
      case Outcome::kOk: break;
    }
    const size_t i = pixels[k];
    const int u = static_cast<int>(i % static_cast<size_t>(stack.width));
    const int v = static_cast<int>(i / static_cast<size_t>(stack.width));
    out.estimate.pixels.push_back({u, v});
    out.estimate.points_obj.push_back(sol[k].point_obj);
    out.estimate.points_cam.push_back(
        back_project(intr, u, v, depth.depth[i]));
    out.estimate.residuals.push_back(sol[k].residual);
  }
  out.stats.solved = out.estimate.size();
  return out;
}

}  // namespace radialdlt
