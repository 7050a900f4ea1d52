#include "radialdlt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "radialdlt/kdtree.hpp"
#include "radialdlt/parallel.hpp"

namespace radialdlt {
namespace {

void check_symmetries(const SymmetrySet& sym) {
  if (sym.size() == 0) {
    throw Error(ErrorCode::kEmptySymmetrySet, "symmetry set is empty");
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// min over symmetries of max over points of dist(a(v), b(S v)).
template <typename Dist>
double min_max(std::span<const Vec3> pts, const RigidPose& est,
               const RigidPose& gt, const SymmetrySet& sym, Dist&& dist) {
  check_symmetries(sym);
  double best = std::numeric_limits<double>::infinity();
  for (const Mat3& s : sym.rotations()) {
    const RigidPose g(gt.rotation() * s, gt.translation());
    std::vector<double> d(pts.size());
    parallel_for(pts.size(), [&](size_t i) {
      d[i] = dist(est.apply(pts[i]), g.apply(pts[i]));
    });
    const double worst = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

MetricPoints metric_points(const TriangleMesh& mesh, size_t limit) {
  MetricPoints out;
  const auto& v = mesh.vertices();
  if (limit == 0 || v.size() <= limit) {
    out.points = v;
    return out;
  }
  out.stride = (v.size() + limit - 1) / limit;
  for (size_t i = 0; i < v.size(); i += out.stride) out.points.push_back(v[i]);
  return out;
}

double add_metric(std::span<const Vec3> pts, const RigidPose& est,
                  const RigidPose& gt) {
  std::vector<double> d(pts.size());
  parallel_for(pts.size(), [&](size_t i) {
    d[i] = (est.apply(pts[i]) - gt.apply(pts[i])).norm();
  });
  return mean_of(d);
}

double add_metric(const TriangleMesh& mesh, const RigidPose& est,
                  const RigidPose& gt) {
  return add_metric(metric_points(mesh).points, est, gt);
}

double adds_metric(std::span<const Vec3> pts, const RigidPose& est,
                   const RigidPose& gt) {
  std::vector<Vec3> target(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) target[i] = gt.apply(pts[i]);
  if (target.empty()) return 0.0;
  const KdTree tree(target);
  std::vector<double> d(pts.size());
  parallel_for(pts.size(), [&](size_t i) {
    d[i] = std::sqrt(tree.nearest(est.apply(pts[i])).squared_distance);
  });
  return mean_of(d);
}

double adds_metric(const TriangleMesh& mesh, const RigidPose& est,
                   const RigidPose& gt) {
  return adds_metric(metric_points(mesh).points, est, gt);
}

double auc(std::span<const double> errors, double max_threshold) {
  if (errors.empty()) {
    throw Error(ErrorCode::kEmptyInput, "AUC needs at least one error");
  }
  if (!(max_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "AUC threshold must be > 0");
  }
  std::vector<double> e(errors.begin(), errors.end());
  std::sort(e.begin(), e.end());
  // Recall is the step function i/n on [e_i, e_{i+1}); integrate to the cap.
  const double n = static_cast<double>(e.size());
  double area = 0.0;
  for (size_t i = 0; i < e.size(); ++i) {
    const double lo = std::max(0.0, e[i]);
    if (lo >= max_threshold) break;
    const double hi =
        i + 1 < e.size() ? std::min(e[i + 1], max_threshold) : max_threshold;
    if (hi > lo) area += static_cast<double>(i + 1) / n * (hi - lo);
  }
  return area / max_threshold;
}

double recall(std::span<const double> errors, double threshold) {
  if (errors.empty()) {
    throw Error(ErrorCode::kEmptyInput, "recall needs at least one error");
  }
  const auto hits = std::count_if(errors.begin(), errors.end(),
                                  [&](double e) { return e < threshold; });
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

double mssd(std::span<const Vec3> pts, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym) {
  return min_max(pts, est, gt, sym,
                 [](const Vec3& a, const Vec3& b) { return (a - b).norm(); });
}

double mssd(const TriangleMesh& mesh, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym) {
  return mssd(metric_points(mesh).points, est, gt, sym);
}

double mspd(std::span<const Vec3> pts, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym,
            const CameraIntrinsics& intr) {
  for (const Vec3& p : pts) {
    if (!(est.apply(p).z() > 0.0) || !(gt.apply(p).z() > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDepth,
                  "MSPD needs every posed vertex in front of the camera");
    }
  }
  return min_max(pts, est, gt, sym, [&](const Vec3& a, const Vec3& b) {
    const PixelCoord pa = project(intr, a);
    const PixelCoord pb = project(intr, b);
    return std::hypot(pa.u - pb.u, pa.v - pb.v);
  });
}

double mspd(const TriangleMesh& mesh, const RigidPose& est,
            const RigidPose& gt, const SymmetrySet& sym,
            const CameraIntrinsics& intr) {
  return mspd(metric_points(mesh).points, est, gt, sym, intr);
}

double rotation_error(const RigidPose& est, const RigidPose& gt,
                      const SymmetrySet& sym) {
  check_symmetries(sym);
  double best = std::numeric_limits<double>::infinity();
  for (const Mat3& s : sym.rotations()) {
    best = std::min(best, rotation_angle_between(est.rotation(),
                                                 gt.rotation() * s));
  }
  return best;
}

double translation_error(const RigidPose& est, const RigidPose& gt) {
  return (est.translation() - gt.translation()).norm();
}

MetricReport evaluate_pose(const TriangleMesh& mesh, const RigidPose& est,
                           const RigidPose& gt, const SymmetrySet& sym,
                           const CameraIntrinsics& intr, bool symmetric,
                           double add_threshold_fraction) {
  const MetricPoints mp = metric_points(mesh);
  MetricReport r;
  r.add = add_metric(mp.points, est, gt);
  r.adds = adds_metric(mp.points, est, gt);
  const double err = symmetric ? r.adds : r.add;
  r.add_recall_10pct = err < add_threshold_fraction * mesh.diameter();
  r.mssd = mssd(mp.points, est, gt, sym);
  r.mspd = mspd(mp.points, est, gt, sym, intr);
  r.rotation_error_deg = rotation_error(est, gt, sym) * 180.0 / std::numbers::pi;
  r.translation_error_m = translation_error(est, gt);
  return r;
}

std::vector<double> surface_errors(const SurfaceEstimate& est,
                                   const PointImage& gt_points_obj) {
  est.validate();
  std::vector<double> e;
  e.reserve(est.size());
  for (size_t i = 0; i < est.size(); ++i) {
    const Pixel& p = est.pixels[i];
    if (p.u < 0 || p.v < 0 || p.u >= gt_points_obj.width ||
        p.v >= gt_points_obj.height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "estimate pixel outside the ground-truth image");
    }
    if (!gt_points_obj.mask.at(p.u, p.v)) continue;
    e.push_back((est.points_obj[i] - gt_points_obj.at(p.u, p.v)).norm());
  }
  return e;
}

std::vector<PercentileRow> surface_error_percentiles(
    std::span<const double> errors, std::span<const double> percentiles,
    std::optional<double> filter_m) {
  if (errors.empty()) {
    throw Error(ErrorCode::kEmptyEstimate, "no surface errors to analyse");
  }
  double prev = 0.0;
  for (double q : percentiles) {
    if (!(q > prev && q <= 100.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "percentiles must be ascending within (0, 100]");
    }
    prev = q;
  }
  std::vector<double> e;
  for (double x : errors) {
    if (!filter_m || x <= *filter_m) e.push_back(x);
  }
  std::sort(e.begin(), e.end());
  std::vector<double> prefix(e.size() + 1, 0.0);
  for (size_t i = 0; i < e.size(); ++i) prefix[i + 1] = prefix[i] + e[i];
  std::vector<PercentileRow> rows;
  for (double q : percentiles) {
    PercentileRow row;
    row.percentile = q;
    const double exact = q * static_cast<double>(e.size()) / 100.0;
    // Guard against q * n / 100 landing a hair above an integer.
    row.count = std::min(
        e.size(), static_cast<size_t>(std::ceil(exact - 1e-9 * exact)));
    if (row.count > 0) {
      row.mean_error = prefix[row.count] / static_cast<double>(row.count);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<PercentileRow> surface_error_percentiles(
    const SurfaceEstimate& est, const PointImage& gt_points_obj,
    std::span<const double> percentiles, std::optional<double> filter_m) {
  return surface_error_percentiles(surface_errors(est, gt_points_obj),
                                   percentiles, filter_m);
}

}  // namespace radialdlt
