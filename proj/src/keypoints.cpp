#include "radialdlt/keypoints.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "radialdlt/hull.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {

void KeypointSet::validate() const {
  if (points.size() < 4) {
    throw Error(ErrorCode::kTooFewKeypoints,
                "need at least 4 keypoints, got " + std::to_string(points.size()));
  }
  for (const Vec3& p : points) {
    if (!p.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite keypoint");
    }
  }
  std::vector<bool> used(points.size(), false);
  for (const auto& [a, b] : pairs) {
    const int n = static_cast<int>(points.size());
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid keypoint pair (" + std::to_string(a) + ", " +
                      std::to_string(b) + ")");
    }
    if (used[a] || used[b]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "keypoint appears in more than one pair");
    }
    used[a] = used[b] = true;
  }
}

std::array<Vec3, 8> OrientedBox::corners() const {
  const Vec3 x = axes.col(0) * (extents.x() / 2.0);
  const Vec3 y = axes.col(1) * (extents.y() / 2.0);
  const Vec3 z = axes.col(2) * (extents.z() / 2.0);
  const Vec3& c = center;
  return {c - x - y - z, c + x - y - z, c - x + y - z, c - x - y + z,
          c + x + y + z, c - x + y + z, c + x - y + z, c + x + y - z};
}

bool OrientedBox::contains(const Vec3& p, double tol) const {
  const Vec3 local = axes.transpose() * (p - center);
  return (local.cwiseAbs() - extents / 2.0).maxCoeff() <= tol;
}

OrientedBox make_oriented_box(const Vec3& center, const Mat3& axes,
                              const Vec3& extents) {
  int z_idx = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(axes(2, i)) > std::abs(axes(2, z_idx))) z_idx = i;
  }
  int x_idx = -1;
  for (int i = 0; i < 3; ++i) {
    if (i == z_idx) continue;
    if (x_idx < 0 || std::abs(axes(0, i)) > std::abs(axes(0, x_idx))) x_idx = i;
  }
  const int y_idx = 3 - z_idx - x_idx;

  Vec3 z = axes.col(z_idx).normalized();
  if (z.z() < 0.0) z = -z;
  Vec3 x = axes.col(x_idx).normalized();
  if (x.x() < 0.0) x = -x;
  x = (x - x.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);

  OrientedBox box;
  box.center = center;
  box.axes.col(0) = x;
  box.axes.col(1) = y;
  box.axes.col(2) = z;
  box.extents = Vec3(extents[x_idx], extents[y_idx], extents[z_idx]);
  return box;
}

namespace {

double frame_volume(const std::vector<Vec3>& pts, const Mat3& frame) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : pts) {
    const Vec3 q = frame.transpose() * p;
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  return (hi - lo).prod();
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

// Rotating calipers in the plane orthogonal to `n`: returns the frame
// [e, n x e, n] of the minimum-area rectangle and its box volume.
std::pair<double, Mat3> face_aligned_box(const std::vector<Vec3>& pts,
                                         const Vec3& n) {
  const Vec3 u = n.unitOrthogonal();
  const Vec3 w = n.cross(u);
  std::vector<Point2> planar;
  planar.reserve(pts.size());
  double h_lo = std::numeric_limits<double>::infinity(), h_hi = -h_lo;
  for (const Vec3& p : pts) {
    planar.push_back({p.dot(u), p.dot(w)});
    h_lo = std::min(h_lo, p.dot(n));
    h_hi = std::max(h_hi, p.dot(n));
  }
  const std::vector<Point2> ring = convex_hull_2d(std::move(planar));
  double best_area = std::numeric_limits<double>::infinity();
  Vec3 best_e = u;
  for (size_t i = 0; i < ring.size(); ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % ring.size()];
    double ex = b.x - a.x, ey = b.y - a.y;
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    ex /= len;
    ey /= len;
    double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
    double lo2 = lo1, hi2 = hi1;
    for (const Point2& p : ring) {
      const double s = p.x * ex + p.y * ey;
      const double t = -p.x * ey + p.y * ex;
      lo1 = std::min(lo1, s), hi1 = std::max(hi1, s);
      lo2 = std::min(lo2, t), hi2 = std::max(hi2, t);
    }
    const double area = (hi1 - lo1) * (hi2 - lo2);
    if (area < best_area) {
      best_area = area;
      best_e = (ex * u + ey * w).normalized();
    }
  }
  Mat3 frame;
  frame.col(0) = best_e;
  frame.col(1) = n.cross(best_e);
  frame.col(2) = n;
  return {best_area * (h_hi - h_lo), frame};
}

// Coordinate pattern search over small rotations; only accepts improvements.
std::pair<double, Mat3> polish(const std::vector<Vec3>& pts, Mat3 frame,
                               double volume) {
  for (double step = 0.1; step > 1e-9; step *= 0.5) {
    for (int sweep = 0; sweep < 200; ++sweep) {
      bool improved = false;
      for (int k = 0; k < 3; ++k) {
        for (double sign : {1.0, -1.0}) {
          const Mat3 trial = orthonormalize(
              frame * Eigen::AngleAxisd(sign * step, Vec3::Unit(k)).matrix());
          const double v = frame_volume(pts, trial);
          if (v < volume * (1.0 - 1e-14)) {
            frame = trial;
            volume = v;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
  }
  return {volume, frame};
}

}  // namespace

OrientedBox compute_obb(const TriangleMesh& mesh) {
  const auto& verts = mesh.vertices();
  const ConvexHull hull = convex_hull_3d(verts);
  std::vector<Vec3> hv;
  hv.reserve(hull.vertex_indices.size());
  for (int i : hull.vertex_indices) hv.push_back(verts[i]);

  std::vector<std::pair<double, Mat3>> candidates;
  std::set<std::array<long long, 3>> seen;
  for (size_t f = 0; f < hull.faces.size(); ++f) {
    Vec3 n = hull.face_normal(verts, f);
    if (!n.allFinite()) continue;
    // Opposite normals give the same box.
    for (int k = 0; k < 3; ++k) {
      if (std::abs(n[k]) > 1e-12) {
        if (n[k] < 0.0) n = -n;
        break;
      }
    }
    const std::array<long long, 3> key{std::llround(n.x() * 1e8),
                                       std::llround(n.y() * 1e8),
                                       std::llround(n.z() * 1e8)};
    if (!seen.insert(key).second) continue;
    candidates.push_back(face_aligned_box(hv, n));
  }

  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : hv) mean += p;
  mean /= static_cast<double>(hv.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : hv) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Mat3 pca = eig.eigenvectors();
  if (pca.determinant() < 0.0) pca.col(2) = -pca.col(2);
  candidates.emplace_back(frame_volume(hv, pca), pca);
  candidates.emplace_back(frame_volume(hv, Mat3::Identity()), Mat3::Identity());
  Rng rng(0x0bb);
  for (int i = 0; i < 32; ++i) {
    const Mat3 r = rng.random_rotation();
    candidates.emplace_back(frame_volume(hv, r), r);
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  constexpr size_t kPolished = 8;
  std::pair<double, Mat3> best = candidates.front();
  for (size_t i = 0; i < std::min(kPolished, candidates.size()); ++i) {
    const auto refined = polish(hv, candidates[i].second, candidates[i].first);
    if (refined.first < best.first * (1.0 - 1e-12)) best = refined;
  }
  // Optima whose faces only touch hull edges (regular tetrahedron) are not
  // face-aligned; polish a spread of the remaining starts as well.
  for (size_t i = kPolished; i < candidates.size(); i += 4) {
    const auto refined = polish(hv, candidates[i].second, candidates[i].first);
    if (refined.first < best.first * (1.0 - 1e-12)) best = refined;
  }

  const Mat3 frame = orthonormalize(best.second);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : verts) {
    const Vec3 q = frame.transpose() * p;
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const Vec3 center = frame * ((lo + hi) / 2.0);
  return make_oriented_box(center, frame, hi - lo);
}

double default_keypoint_offset(const OrientedBox& box) {
  return 0.2 * box.extents.maxCoeff();
}

KeypointSet symmetric_keypoints(const OrientedBox& box, double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::kInvalidArgument, "keypoint offset d must be > 0");
  }
  if (!(box.extents.array() > 0.0).all() || !is_rotation(box.axes, 1e-6)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid oriented box");
  }
  const auto q = box.corners();
  KeypointSet kps;
  for (const auto& face : kKeypointFaces) {
    const Vec3 center = (q[face[0]] + q[face[1]] + q[face[2]] + q[face[3]]) / 4.0;
    const Vec3 e1 = q[face[1]] - q[face[0]];
    const Vec3 e2 = q[face[3]] - q[face[0]];
    const Vec3 n = e1.cross(e2).normalized();
    kps.points.push_back(center + d * n);
  }
  kps.pairs = {{0, 1}, {2, 3}};
  kps.offset_d = d;
  return kps;
}

KeypointSet farthest_point_keypoints(const TriangleMesh& mesh, int count) {
  const auto& v = mesh.vertices();
  if (count < 4) {
    throw Error(ErrorCode::kTooFewKeypoints, "need at least 4 keypoints");
  }
  if (v.size() < static_cast<size_t>(count)) {
    throw Error(ErrorCode::kDegenerateMesh, "mesh has fewer vertices than keypoints");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : v) centroid += p;
  centroid /= static_cast<double>(v.size());
  std::vector<double> dist(v.size());
  for (size_t i = 0; i < v.size(); ++i) dist[i] = (v[i] - centroid).squaredNorm();

  KeypointSet kps;
  for (int k = 0; k < count; ++k) {
    size_t pick = static_cast<size_t>(
        std::max_element(dist.begin(), dist.end()) - dist.begin());
    if (k == 3) {
      const Vec3 n = (kps.points[1] - kps.points[0]).cross(kps.points[2] - kps.points[0]);
      double best = -1.0;
      for (size_t i = 0; i < v.size(); ++i) {
        const double h = std::abs(n.dot(v[i] - kps.points[0]));
        if (h > best) best = h, pick = i;
      }
    }
    kps.points.push_back(v[pick]);
    if (k == 0) std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < v.size(); ++i) {
      dist[i] = std::min(dist[i], (v[i] - v[pick]).squaredNorm());
    }
  }
  if (coplanarity_measure(kps.points) <= kCoplanarityThreshold) {
    throw Error(ErrorCode::kDegenerateMesh, "sampled keypoints are coplanar");
  }
  return kps;
}

double coplanarity_measure(std::span<const Vec3> pts) {
  const size_t n = pts.size();
  double best = 0.0;
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      const Vec3 ab = pts[b] - pts[a];
      for (size_t c = b + 1; c < n; ++c) {
        const Vec3 abc = ab.cross(pts[c] - pts[a]);
        for (size_t d = c + 1; d < n; ++d) {
          best = std::max(best, std::abs(abc.dot(pts[d] - pts[a])));
        }
      }
    }
  }
  return best;
}

void check_half_turn_symmetry(const SymmetrySet& sym) {
  if (sym.size() == 1) return;
  if (sym.size() > 2) {
    throw Error(ErrorCode::kUnsupportedSymmetry,
                "channel ordering is defined for a single half-turn symmetry; "
                "got " + std::to_string(sym.size() - 1) + " non-identity elements");
  }
  const Mat3& r = sym.rotations()[1];
  if ((r * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kUnsupportedSymmetry,
                "symmetry is not a half-turn (order > 2)");
  }
}

std::vector<int> order_channels(const KeypointSet& kps, const RigidPose& pose) {
  kps.validate();
  if (kps.pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "channel ordering needs symmetric keypoint pairs");
  }
  check_half_turn_symmetry(kps.symmetries);
  std::vector<int> perm(kps.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  for (auto [a, b] : kps.pairs) {
    if (a > b) std::swap(a, b);
    const double da = pose.apply(kps.points[a]).norm();
    const double db = pose.apply(kps.points[b]).norm();
    if (db < da - 1e-12) {
      perm[a] = b;
      perm[b] = a;
    }
  }
  return perm;
}

}  // namespace radialdlt
