#include "radialdlt/posefit.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "radialdlt/kdtree.hpp"
#include "radialdlt/parallel.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {
namespace {

constexpr int kBatchSize = 64;
constexpr int kMaxRefits = 10;
constexpr double kCollinearRatio = 1e-12;

struct Hypothesis {
  size_t count = 0;
  double rms = std::numeric_limits<double>::infinity();
  int iteration = -1;
  std::optional<RigidPose> pose;
};

// Lexicographic (count, -rms, -iteration).
bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.rms != b.rms) return a.rms < b.rms;
  return a.iteration < b.iteration;
}

void score(const RigidPose& pose, std::span<const Vec3> src,
           std::span<const Vec3> dst, double threshold, size_t& count,
           double& rms, std::vector<size_t>* inliers) {
  count = 0;
  double sum = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    const double d2 = (dst[i] - pose.apply(src[i])).squaredNorm();
    if (d2 < threshold * threshold) {
      ++count;
      sum += d2;
      if (inliers) inliers->push_back(i);
    }
  }
  rms = count ? std::sqrt(sum / static_cast<double>(count))
              : std::numeric_limits<double>::infinity();
}

std::optional<RigidPose> try_umeyama(std::span<const Vec3> src,
                                     std::span<const Vec3> dst) {
  try {
    return umeyama(src, dst);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateConfiguration) return std::nullopt;
    throw;
  }
}

std::vector<Vec3> gather(std::span<const Vec3> pts,
                         const std::vector<size_t>& idx) {
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(pts[i]);
  return out;
}

// Required iteration count for the adaptive stop.
double needed_iterations(double inlier_ratio, int s, double confidence) {
  const double w_s = std::pow(inlier_ratio, s);
  if (w_s >= 1.0) return 0.0;
  if (w_s <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(1.0 - confidence) / std::log(1.0 - w_s);
}

}  // namespace

RigidPose umeyama(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "umeyama needs equally long point lists");
  }
  if (src.size() < 3) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "umeyama needs at least 3 correspondences");
  }
  const double n = static_cast<double>(src.size());
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;
  Mat3 cov = Mat3::Zero();
  Mat3 scatter = Mat3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    const Vec3 s = src[i] - mu_s;
    cov += (dst[i] - mu_d) * s.transpose();
    scatter += s * s.transpose();
  }
  const Eigen::JacobiSVD<Mat3> sc(scatter);
  const Vec3 sv = sc.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= kCollinearRatio * sv[0]) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "source points are collinear or coincident");
  }
  const Eigen::JacobiSVD<Mat3> svd(cov / n,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) d[2] = -1.0;
  const Mat3 r = u * d.asDiagonal() * v.transpose();
  return RigidPose::from_approximate(r, mu_d - r * mu_s);
}

void RansacConfig::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  }
  if (!(inlier_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inlier_threshold must be > 0");
  }
  if (sample_size < 3) {
    throw Error(ErrorCode::kInvalidArgument, "sample_size must be >= 3");
  }
  if (!(min_inlier_fraction > 0.0 && min_inlier_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "min_inlier_fraction must lie in (0, 1]");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence must lie in (0, 1)");
  }
}

PoseResult ransac_pose(std::span<const Vec3> src, std::span<const Vec3> dst,
                       const RansacConfig& cfg) {
  cfg.validate();
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "correspondence lists differ in length");
  }
  const size_t n = src.size();
  const size_t s = static_cast<size_t>(cfg.sample_size);
  if (n < s) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least " + std::to_string(s) + " correspondences, got " +
                    std::to_string(n));
  }

  PoseResult result;
  Hypothesis best;

  // Outlier-free fast path.
  if (auto full = try_umeyama(src, dst)) {
    size_t count;
    double rms;
    score(*full, src, dst, cfg.inlier_threshold, count, rms, nullptr);
    if (count == n) {
      result.pose = *full;
      result.inlier_count = n;
      result.inlier_rms = rms;
      result.inliers.resize(n);
      std::iota(result.inliers.begin(), result.inliers.end(), size_t{0});
      return result;
    }
    best = {count, rms, -1, *full};
  }

  std::vector<Hypothesis> batch(kBatchSize);
  int done = 0;
  while (done < cfg.max_iterations) {
    const int m = std::min(kBatchSize, cfg.max_iterations - done);
    parallel_for(static_cast<size_t>(m), [&](size_t b) {
      const int it = done + static_cast<int>(b);
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(it)));
      // Partial Fisher-Yates over a sparse index map.
      std::vector<size_t> pick(s);
      std::vector<std::pair<size_t, size_t>> swaps;
      auto lookup = [&](size_t k) {
        for (auto it2 = swaps.rbegin(); it2 != swaps.rend(); ++it2) {
          if (it2->first == k) return it2->second;
        }
        return k;
      };
      for (size_t k = 0; k < s; ++k) {
        const size_t j = k + rng.uniform_index(n - k);
        const size_t vj = lookup(j);
        const size_t vk = lookup(k);
        pick[k] = vj;
        swaps.emplace_back(j, vk);
      }
      Hypothesis h;
      h.iteration = it;
      std::vector<Vec3> ps(s), pd(s);
      for (size_t k = 0; k < s; ++k) {
        ps[k] = src[pick[k]];
        pd[k] = dst[pick[k]];
      }
      h.pose = try_umeyama(ps, pd);
      if (h.pose) {
        score(*h.pose, src, dst, cfg.inlier_threshold, h.count, h.rms,
              nullptr);
      }
      batch[b] = std::move(h);
    });
    for (int b = 0; b < m; ++b) {
      if (batch[b].pose && better(batch[b], best)) best = batch[b];
    }
    done += m;
    const double w = static_cast<double>(best.count) / static_cast<double>(n);
    if (done >= needed_iterations(w, cfg.sample_size, cfg.confidence)) break;
  }
  result.iterations_used = done;

  if (!best.pose || static_cast<double>(best.count) <
                        cfg.min_inlier_fraction * static_cast<double>(n)) {
    throw Error(ErrorCode::kNoConsensus,
                "best hypothesis has " + std::to_string(best.count) + " of " +
                    std::to_string(n) + " inliers");
  }

  // Refit on the consensus set until it stops changing. The refit always
  // replaces the minimal-sample model, even if it scores fewer inliers.
  RigidPose pose = *best.pose;
  std::vector<size_t> inliers;
  size_t count;
  double rms;
  score(pose, src, dst, cfg.inlier_threshold, count, rms, &inliers);
  for (int k = 0; k < kMaxRefits && inliers.size() >= 3; ++k) {
    auto refit = try_umeyama(gather(src, inliers), gather(dst, inliers));
    if (!refit) break;
    std::vector<size_t> next;
    size_t next_count;
    double next_rms;
    score(*refit, src, dst, cfg.inlier_threshold, next_count, next_rms, &next);
    if (next_count < 3) break;
    pose = *refit;
    count = next_count;
    rms = next_rms;
    const bool stable = next == inliers;
    inliers = std::move(next);
    if (stable) break;
  }
  result.pose = pose;
  result.inlier_count = count;
  result.inlier_rms = rms;
  result.inliers = std::move(inliers);
  return result;
}

PoseResult ransac_pose(const SurfaceEstimate& est, const RansacConfig& cfg) {
  est.validate();
  return ransac_pose(est.points_obj, est.points_cam, cfg);
}

namespace {

// Shared ICP loop. `associate(pose, model_pts, dst_pts)` fills the matched
// model-frame and camera-frame points and returns the RMS.
template <typename Associate>
IcpResult run_icp(const RigidPose& initial, size_t count, IcpOptions opts,
                  Associate&& associate) {
  std::vector<Vec3> a(count), b(count);
  IcpResult res;
  res.pose = initial;
  double rms = associate(initial, a, b);
  res.initial_rms = rms;
  res.rms_history.push_back(rms);
  std::vector<Vec3> a2(count), b2(count);
  for (int it = 0; it < opts.max_iterations; ++it) {
    auto cand = try_umeyama(a, b);
    if (!cand) break;
    const double next = associate(*cand, a2, b2);
    ++res.iterations;
    if (!(next <= rms)) break;  // reject non-improving steps
    const double change = rms - next;
    res.pose = *cand;
    rms = next;
    res.rms_history.push_back(rms);
    std::swap(a, a2);
    std::swap(b, b2);
    if (change < opts.tolerance) break;
  }
  res.final_rms = rms;
  return res;
}

double rms_of(const std::vector<double>& d2) {
  double sum = 0.0;
  for (double x : d2) sum += x;
  return std::sqrt(sum / static_cast<double>(d2.size()));
}

}  // namespace

IcpResult icp_refine(const RigidPose& initial, std::span<const Vec3> src_cloud,
                     std::span<const Vec3> dst_cloud, IcpOptions opts) {
  if (src_cloud.empty() || dst_cloud.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "ICP needs two non-empty clouds");
  }
  const KdTree tree(dst_cloud);
  std::vector<double> d2(src_cloud.size());
  return run_icp(initial, src_cloud.size(), opts,
                 [&](const RigidPose& pose, std::vector<Vec3>& model,
                     std::vector<Vec3>& scene) {
                   parallel_for(src_cloud.size(), [&](size_t i) {
                     const auto hit = tree.nearest(pose.apply(src_cloud[i]));
                     model[i] = src_cloud[i];
                     scene[i] = tree.point(hit.index);
                     d2[i] = hit.squared_distance;
                   });
                   return rms_of(d2);
                 });
}

IcpResult icp_refine_to_surface(const RigidPose& initial,
                                std::span<const Vec3> scene_cam,
                                const TriangleBvh& model_bvh,
                                IcpOptions opts) {
  if (scene_cam.empty() || model_bvh.empty()) {
    throw Error(ErrorCode::kEmptyCloud,
                "surface ICP needs scene points and a non-empty model");
  }
  std::vector<double> d2(scene_cam.size());
  return run_icp(initial, scene_cam.size(), opts,
                 [&](const RigidPose& pose, std::vector<Vec3>& model,
                     std::vector<Vec3>& scene) {
                   const RigidPose inv = pose.inverse();
                   parallel_for(scene_cam.size(), [&](size_t i) {
                     const auto c =
                         model_bvh.closest_point(inv.apply(scene_cam[i]));
                     model[i] = c.point;
                     scene[i] = scene_cam[i];
                     d2[i] = c.squared_distance;
                   });
                   return rms_of(d2);
                 });
}

}  // namespace radialdlt
