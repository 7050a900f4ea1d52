#include "radialdlt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "radialdlt/bvh.hpp"
#include "radialdlt/parallel.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {
namespace {

void check_aligned(const PointImage& pts, const SegMask& mask) {
  if (pts.width != mask.width() || pts.height != mask.height() ||
      pts.points.size() != mask.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "point image and mask are not pixel-aligned");
  }
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kNegativeSigma, "noise sigma must be >= 0");
  }
}

}  // namespace

SegMask DepthImage::mask() const {
  SegMask m(width, height);
  for (size_t i = 0; i < depth.size(); ++i) m.set_index(i, depth[i] > 0.0);
  return m;
}

RenderResult render(const TriangleMesh& mesh, const RigidPose& pose,
                    const CameraIntrinsics& intr) {
  intr.validate();
  const TriangleMesh posed = transform_mesh(mesh, pose);
  for (const Vec3& v : posed.vertices()) {
    if (!(v.z() > 0.0)) {
      throw Error(ErrorCode::kObjectBehindCamera,
                  "posed mesh has vertices at or behind the camera plane");
    }
  }
  const TriangleBvh bvh(posed);
  const Mat3 rt = pose.rotation().transpose();
  const Vec3 t = pose.translation();

  RenderResult out;
  const int w = intr.width, h = intr.height;
  const size_t n = static_cast<size_t>(w) * h;
  out.depth.width = w;
  out.depth.height = h;
  out.depth.depth.assign(n, 0.0);
  out.mask = SegMask(w, h);
  out.points_obj.width = w;
  out.points_obj.height = h;
  out.points_obj.points.assign(n, Vec3::Zero());

  // Rays outside the projected vertex bounds cannot hit any triangle.
  double u_lo = w, u_hi = -1.0, v_lo = h, v_hi = -1.0;
  for (const Vec3& p : posed.vertices()) {
    const PixelCoord px = project(intr, p);
    u_lo = std::min(u_lo, px.u);
    u_hi = std::max(u_hi, px.u);
    v_lo = std::min(v_lo, px.v);
    v_hi = std::max(v_hi, px.v);
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(u_lo)) - 1);
  const int u1 = std::min(w - 1, static_cast<int>(std::ceil(u_hi)) + 1);
  const int v0 = std::max(0, static_cast<int>(std::floor(v_lo)) - 1);
  const int v1 = std::min(h - 1, static_cast<int>(std::ceil(v_hi)) + 1);
  if (posed.vertices().empty() || u0 > u1 || v0 > v1) {
    out.points_obj.mask = out.mask;
    return out;
  }

  parallel_for(static_cast<size_t>(v1 - v0 + 1), [&](size_t row) {
    const int v = v0 + static_cast<int>(row);
    for (int u = u0; u <= u1; ++u) {
      // Unit-z ray direction: the hit parameter is the camera-frame depth.
      const Vec3 dir((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      const auto hit = bvh.intersect(Vec3::Zero(), dir);
      if (!hit) continue;
      const size_t i = static_cast<size_t>(v) * w + u;
      const Vec3 p_cam = back_project(intr, u, v, hit->t);
      out.depth.depth[i] = hit->t;
      out.mask.set_index(i, true);
      out.points_obj.points[i] = rt * (p_cam - t);
    }
  });
  out.points_obj.mask = out.mask;
  return out;
}

RadialMapStack radial_maps(const PointImage& gt_points_obj,
                           const KeypointSet& kps, const SegMask& mask) {
  check_aligned(gt_points_obj, mask);
  RadialMapStack s;
  s.width = mask.width();
  s.height = mask.height();
  s.channels = static_cast<int>(kps.size());
  s.mask = mask;
  s.values.assign(mask.size() * kps.size(), 0.0);
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask.at_index(i)) continue;
    const Vec3& p = gt_points_obj.points[i];
    for (size_t j = 0; j < kps.size(); ++j) {
      s.values[i * kps.size() + j] =
          kDecimetersPerMeter * (p - kps.points[j]).norm();
    }
  }
  return s;
}

RadialMapStack reorder_channels(const RadialMapStack& stack,
                                std::span<const int> perm) {
  if (perm.size() != static_cast<size_t>(stack.channels)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "channel permutation length differs from channel count");
  }
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || static_cast<size_t>(p) >= perm.size() || seen[p]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "channel order is not a permutation");
    }
    seen[p] = true;
  }
  RadialMapStack out = stack;
  const size_t c = perm.size();
  for (size_t i = 0; i < stack.mask.size(); ++i) {
    for (size_t s = 0; s < c; ++s) {
      out.values[i * c + s] = stack.values[i * c + perm[s]];
    }
  }
  return out;
}

Vec3 normalize_coord(const TriangleMesh& mesh, const Vec3& p) {
  const Vec3 lo = mesh.aabb_min();
  const Vec3 ext = mesh.aabb_max() - lo;
  Vec3 c;
  for (int k = 0; k < 3; ++k) {
    c[k] = ext[k] > 0.0 ? std::clamp((p[k] - lo[k]) / ext[k], 0.0, 1.0) : 0.5;
  }
  return c;
}

Vec3 denormalize_coord(const TriangleMesh& mesh, const Vec3& c) {
  const Vec3 lo = mesh.aabb_min();
  const Vec3 ext = mesh.aabb_max() - lo;
  Vec3 p;
  for (int k = 0; k < 3; ++k) {
    p[k] = ext[k] > 0.0 ? lo[k] + c[k] * ext[k] : lo[k];
  }
  return p;
}

NormalizedCoordMap normalized_coords(const PointImage& gt_points_obj,
                                     const TriangleMesh& mesh,
                                     const SegMask& mask) {
  check_aligned(gt_points_obj, mask);
  NormalizedCoordMap m;
  m.width = mask.width();
  m.height = mask.height();
  m.channels = 3;
  m.mask = mask;
  m.values.assign(mask.size() * 3, 0.0);
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask.at_index(i)) continue;
    const Vec3 c = normalize_coord(mesh, gt_points_obj.points[i]);
    for (int k = 0; k < 3; ++k) m.values[i * 3 + k] = c[k];
  }
  return m;
}

PointImage camera_points(const DepthImage& depth,
                         const CameraIntrinsics& intr) {
  PointImage out;
  out.width = depth.width;
  out.height = depth.height;
  out.points.assign(depth.depth.size(), Vec3::Zero());
  out.mask = depth.mask();
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double z = depth.at(u, v);
      if (z > 0.0) {
        out.points[static_cast<size_t>(v) * depth.width + u] =
            back_project(intr, u, v, z);
      }
    }
  }
  return out;
}

RadialMapStack inject_noise(const RadialMapStack& stack, double sigma_dm,
                            std::uint64_t seed) {
  check_sigma(sigma_dm);
  RadialMapStack out = stack;
  if (sigma_dm == 0.0) return out;
  Rng rng(seed);
  const size_t c = static_cast<size_t>(stack.channels);
  for (size_t i = 0; i < stack.mask.size(); ++i) {
    if (!stack.mask.at_index(i)) continue;
    for (size_t j = 0; j < c; ++j) {
      double& x = out.values[i * c + j];
      x = std::max(0.0, x + sigma_dm * rng.gaussian());
    }
  }
  return out;
}

SurfaceEstimate inject_noise(const SurfaceEstimate& est, double sigma_m,
                             std::uint64_t seed) {
  check_sigma(sigma_m);
  SurfaceEstimate out = est;
  if (sigma_m == 0.0) return out;
  Rng rng(seed);
  for (Vec3& p : out.points_obj) {
    for (int k = 0; k < 3; ++k) p[k] += sigma_m * rng.gaussian();
  }
  return out;
}

void SurfaceEstimate::validate() const {
  if (points_obj.size() != pixels.size() ||
      points_cam.size() != pixels.size() ||
      residuals.size() != pixels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "surface estimate lists differ in length");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(pixels.size());
  for (const Pixel& p : pixels) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.v)) << 32) |
        static_cast<std::uint32_t>(p.u);
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pixel appears twice in surface estimate");
    }
  }
}

}  // namespace radialdlt
