#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/surface.hpp"

namespace radialdlt {

/// Camera-frame z per pixel (meters); 0 marks pixels without a hit.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  double at(int u, int v) const {
    return depth[static_cast<size_t>(v) * width + u];
  }
  SegMask mask() const;
};

/// Per-pixel 3-vectors aligned with an image, plus the mask of valid pixels.
struct PointImage {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  SegMask mask;

  const Vec3& at(int u, int v) const {
    return points[static_cast<size_t>(v) * width + u];
  }
};

/// H x W x C row-major values with a segmentation mask. Out-of-mask values are
/// exactly zero.
struct ChannelMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;
  SegMask mask;

  size_t offset(int u, int v) const {
    return (static_cast<size_t>(v) * width + u) * channels;
  }
  double at(int u, int v, int c) const { return values[offset(u, v) + c]; }
  double& at(int u, int v, int c) { return values[offset(u, v) + c]; }

  bool same_layout(const ChannelMap& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Radial distances (decimeters) from each pixel's surface point to each
/// keypoint, one channel per keypoint.
struct RadialMapStack : ChannelMap {};

/// Object coordinates mapped per axis from the mesh bounding range to [0, 1].
struct NormalizedCoordMap : ChannelMap {};

struct RenderResult {
  DepthImage depth;
  SegMask mask;
  PointImage points_obj;  // exact object-frame hit points
};

/// Ray-casts every pixel against the posed mesh (BVH accelerated, rows in
/// parallel). Throws kObjectBehindCamera if any posed vertex has z <= 0.
RenderResult render(const TriangleMesh& mesh, const RigidPose& pose,
                    const CameraIntrinsics& intr);

/// Channel j at pixel i is 10 * ||p_i - k_j|| (meters -> decimeters).
RadialMapStack radial_maps(const PointImage& gt_points_obj,
                           const KeypointSet& kps, const SegMask& mask);

/// Channel s of the result is channel perm[s] of `stack`.
RadialMapStack reorder_channels(const RadialMapStack& stack,
                                std::span<const int> perm);

NormalizedCoordMap normalized_coords(const PointImage& gt_points_obj,
                                     const TriangleMesh& mesh,
                                     const SegMask& mask);

/// Object point for a normalized coordinate (inverse of the affine map).
Vec3 denormalize_coord(const TriangleMesh& mesh, const Vec3& c);
Vec3 normalize_coord(const TriangleMesh& mesh, const Vec3& p);

/// Camera-frame points back-projected from depth (mask = depth > 0).
PointImage camera_points(const DepthImage& depth, const CameraIntrinsics& intr);

/// Adds i.i.d. N(0, sigma^2) to every in-mask value, drawn in row-major,
/// channel-minor order. Results are clamped at 0 so radii stay non-negative.
/// Throws kNegativeSigma for sigma < 0.
RadialMapStack inject_noise(const RadialMapStack& stack, double sigma_dm,
                            std::uint64_t seed);

/// Adds i.i.d. N(0, sigma^2) to each coordinate of every object-frame point.
SurfaceEstimate inject_noise(const SurfaceEstimate& est, double sigma_m,
                             std::uint64_t seed);

}  // namespace radialdlt
