#include <gtest/gtest.h>

#include <cmath>

#include "radialdlt/keypoints.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/rng.hpp"
#include "test_support.hpp"

namespace radialdlt {
namespace {

const CameraIntrinsics kSmall{500, 500, 64, 48, 128, 96};

TEST(Render, SphereCenterPixelDepth) {
  const double r = 0.1;
  const TriangleMesh sphere = make_uv_sphere(r, 32, 64);
  const RenderResult out =
      render(sphere, RigidPose(Mat3::Identity(), Vec3(0, 0, 1)), kSmall);
  EXPECT_NEAR(out.depth.at(64, 48), 1.0 - r, 1e-4);
  EXPECT_TRUE(out.mask.at(64, 48));
  EXPECT_FALSE(out.mask.at(0, 0));
}

TEST(Render, OutsideFrustumGivesEmptyMask) {
  const RenderResult out = render(make_uv_sphere(0.1, 8, 16),
                                  RigidPose(Mat3::Identity(), Vec3(5, 0, 1)),
                                  kSmall);
  EXPECT_EQ(out.mask.count(), 0u);
  for (double d : out.depth.depth) EXPECT_EQ(d, 0.0);
}

TEST(Render, BehindCameraRaises) {
  try {
    render(make_uv_sphere(0.1, 8, 16), RigidPose(Mat3::Identity(), Vec3(0, 0, 0.05)),
           kSmall);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kObjectBehindCamera);
  }
}

TEST(Render, BackProjectionRoundTrip) {
  const TriangleMesh mesh = make_blob_mesh(0.05, 24, 48, 7);
  Rng rng(3);
  const CameraIntrinsics intr = CameraIntrinsics::linemod();
  for (int trial = 0; trial < 3; ++trial) {
    const RigidPose pose(rng.random_rotation(),
                         Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                              rng.uniform(0.6, 0.9)));
    const RenderResult out = render(mesh, pose, intr);
    ASSERT_GT(out.mask.count(), 500u);
    const RigidPose inv = pose.inverse();
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        if (!out.mask.at(u, v)) continue;
        const Vec3 obj = inv.apply(back_project(intr, u, v, out.depth.at(u, v)));
        ASSERT_LT((obj - out.points_obj.at(u, v)).norm(), 1e-6);
      }
    }
  }
}

TEST(Render, HitPointsLieOnTheSurface) {
  const TriangleMesh box = make_box_mesh(Vec3(0.3, 0.2, 0.1));
  Rng rng(4);
  const RigidPose pose(rng.random_rotation(), Vec3(0, 0, 1));
  const RenderResult out = render(box, pose, CameraIntrinsics::linemod());
  for (size_t i = 0; i < out.mask.size(); ++i) {
    if (!out.mask.at_index(i)) continue;
    const Vec3 q = out.points_obj.points[i].cwiseAbs();
    const double gap = std::min({std::abs(q.x() - 0.15), std::abs(q.y() - 0.1),
                                 std::abs(q.z() - 0.05)});
    ASSERT_LT(gap, 1e-9);
  }
}

TEST(RadialMaps, HandExamples) {
  PointImage pts;
  pts.width = 2;
  pts.height = 1;
  pts.points = {Vec3(0.1, 0, 0), Vec3(0.02, 0.03, -0.01)};
  pts.mask = SegMask(2, 1);
  pts.mask.set(0, 0, true);
  pts.mask.set(1, 0, true);
  const KeypointSet k = testing_support::keypoint_set(
      {Vec3(0, 0, 0), Vec3(0.02, 0.03, -0.01), Vec3(1, 0, 0), Vec3(0, 1, 0)});
  const RadialMapStack s = radial_maps(pts, k, pts.mask);
  EXPECT_EQ(s.channels, 4);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 0), 1.0);
  EXPECT_EQ(s.at(1, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 2), 9.0);
}

TEST(RadialMaps, IsometricAndMaskConsistency) {
  const TriangleMesh mesh = make_blob_mesh(0.05, 24, 48, 7);
  const OrientedBox box = compute_obb(mesh);
  const KeypointSet k = symmetric_keypoints(box, default_keypoint_offset(box));
  const CameraIntrinsics intr = CameraIntrinsics::linemod();
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const RigidPose pose(rng.random_rotation(), Vec3(0.02, -0.03, 0.7));
    const RenderResult out = render(mesh, pose, intr);
    const RadialMapStack s = radial_maps(out.points_obj, k, out.mask);
    const NormalizedCoordMap c = normalized_coords(out.points_obj, mesh, out.mask);
    EXPECT_EQ(out.depth.mask(), out.mask);
    EXPECT_EQ(s.mask, out.mask);
    EXPECT_EQ(c.mask, out.mask);
    EXPECT_EQ(out.points_obj.mask, out.mask);
    const PointImage cam = camera_points(out.depth, intr);
    EXPECT_EQ(cam.mask, out.mask);
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        if (!out.mask.at(u, v)) {
          for (int j = 0; j < 4; ++j) ASSERT_EQ(s.at(u, v, j), 0.0);
          for (int j = 0; j < 3; ++j) ASSERT_EQ(c.at(u, v, j), 0.0);
          continue;
        }
        for (int j = 0; j < 4; ++j) {
          const double cam_r = 10.0 * (cam.at(u, v) - pose.apply(k.points[j])).norm();
          ASSERT_NEAR(s.at(u, v, j), cam_r, 1e-6);
        }
        for (int j = 0; j < 3; ++j) {
          ASSERT_GE(c.at(u, v, j), 0.0);
          ASSERT_LE(c.at(u, v, j), 1.0);
        }
      }
    }
  }
}

TEST(NormalizedCoords, RangeEndpointsAndMidpoint) {
  const TriangleMesh box = make_box_mesh(Vec3(0.3, 0.2, 0.1));
  EXPECT_EQ(normalize_coord(box, box.aabb_min()), Vec3(0, 0, 0));
  EXPECT_EQ(normalize_coord(box, box.aabb_max()), Vec3(1, 1, 1));
  EXPECT_LT((normalize_coord(box, Vec3::Zero()) - Vec3::Constant(0.5)).norm(), 1e-15);
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(rng.uniform(-0.15, 0.15), rng.uniform(-0.1, 0.1),
                 rng.uniform(-0.05, 0.05));
    EXPECT_LT((denormalize_coord(box, normalize_coord(box, p)) - p).norm(), 1e-15);
  }
}

RadialMapStack constant_stack(int w, int h, int c, double value) {
  RadialMapStack s;
  s.width = w;
  s.height = h;
  s.channels = c;
  s.values.assign(static_cast<size_t>(w) * h * c, value);
  s.mask = SegMask(w, h);
  for (size_t i = 0; i < s.mask.size(); ++i) s.mask.set_index(i, true);
  return s;
}

TEST(InjectNoise, ZeroSigmaIsBitwiseIdentity) {
  RadialMapStack s = constant_stack(10, 10, 4, 3.25);
  s.values[17] = 1.0 / 3.0;
  const RadialMapStack out = inject_noise(s, 0.0, 9);
  EXPECT_EQ(out.values, s.values);
  EXPECT_EQ(out.mask, s.mask);
}

TEST(InjectNoise, UnitSigmaMoments) {
  const RadialMapStack s = constant_stack(400, 300, 1, 50.0);
  const RadialMapStack out = inject_noise(s, 1.0, 123);
  double sum = 0.0, sum2 = 0.0;
  for (double x : out.values) {
    sum += x - 50.0;
    sum2 += (x - 50.0) * (x - 50.0);
  }
  const double n = static_cast<double>(out.values.size());
  const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  EXPECT_GE(sd, 0.99);
  EXPECT_LE(sd, 1.01);
}

TEST(InjectNoise, DeterministicMaskedAndNonNegative) {
  RadialMapStack s = constant_stack(50, 40, 4, 0.5);
  s.mask.set(3, 3, false);
  for (int c = 0; c < 4; ++c) s.at(3, 3, c) = 0.0;
  const RadialMapStack a = inject_noise(s, 1.0, 5);
  const RadialMapStack b = inject_noise(s, 1.0, 5);
  const RadialMapStack other = inject_noise(s, 1.0, 6);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, other.values);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(a.at(3, 3, c), 0.0);
  for (double x : a.values) EXPECT_GE(x, 0.0);
  try {
    inject_noise(s, -1.0, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeSigma);
  }
}

TEST(InjectNoise, SurfaceEstimateOnlyObjectPointsMove) {
  SurfaceEstimate est;
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    est.pixels.push_back({i % 100, i / 100});
    est.points_obj.push_back(Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
    est.points_cam.push_back(Vec3(rng.uniform(), rng.uniform(), 1.0));
    est.residuals.push_back(0.0);
  }
  const SurfaceEstimate out = inject_noise(est, 0.002, 8);
  EXPECT_EQ(out.points_cam, est.points_cam);
  EXPECT_EQ(out.pixels, est.pixels);
  double sum2 = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    sum2 += (out.points_obj[i] - est.points_obj[i]).squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(sum2 / (3.0 * est.size())), 0.002, 1e-4);
  EXPECT_EQ(inject_noise(est, 0.0, 8).points_obj, est.points_obj);
}

TEST(ReorderChannels, PermutesAndValidates) {
  RadialMapStack s = constant_stack(2, 2, 3, 0.0);
  for (int c = 0; c < 3; ++c) s.at(1, 1, c) = c + 1.0;
  const std::vector<int> perm{2, 0, 1};
  const RadialMapStack r = reorder_channels(s, perm);
  EXPECT_EQ(r.at(1, 1, 0), 3.0);
  EXPECT_EQ(r.at(1, 1, 1), 1.0);
  EXPECT_EQ(r.at(1, 1, 2), 2.0);
  const std::vector<int> bad{0, 0, 1};
  EXPECT_THROW(reorder_channels(s, bad), Error);
  const std::vector<int> short_perm{0, 1};
  EXPECT_THROW(reorder_channels(s, short_perm), Error);
}

}  // namespace
}  // namespace radialdlt
