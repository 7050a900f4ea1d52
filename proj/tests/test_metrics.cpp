#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "radialdlt/mesh.hpp"
#include "radialdlt/metrics.hpp"
#include "radialdlt/rng.hpp"
#include "test_support.hpp"

namespace radialdlt {
namespace {

using namespace testing_support;

const CameraIntrinsics kIntr = CameraIntrinsics::linemod();

TriangleMesh cloud_mesh(Rng& rng, int n) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back(Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.04, 0.04),
                       rng.uniform(-0.03, 0.03)));
  }
  return TriangleMesh(pts, {});
}

RigidPose front_pose(Rng& rng) {
  return RigidPose(rng.random_rotation(),
                   Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                        rng.uniform(0.5, 1.0)));
}

TEST(Add, IdentityAndTranslation) {
  Rng rng(1);
  const TriangleMesh m = cloud_mesh(rng, 100);
  const RigidPose gt = front_pose(rng);
  EXPECT_EQ(add_metric(m, gt, gt), 0.0);
  const Vec3 delta(0.003, -0.004, 0.012);
  const RigidPose est(gt.rotation(), gt.translation() + delta);
  EXPECT_NEAR(add_metric(m, est, gt), delta.norm(), 1e-15);
}

TEST(MetricOracles, RandomPairsMatchBruteForce) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const TriangleMesh m = cloud_mesh(rng, 20 + static_cast<int>(rng.uniform_index(81)));
    const RigidPose gt = front_pose(rng);
    const RigidPose est = front_pose(rng);
    const std::vector<Mat3> syms{Mat3::Identity(),
                                 axis_rotation(Vec3::UnitZ(), std::numbers::pi)};
    const SymmetrySet sym(syms);
    const auto& v = m.vertices();
    EXPECT_NEAR(add_metric(m, est, gt), oracle_add(v, est, gt), 1e-12);
    EXPECT_NEAR(adds_metric(m, est, gt), oracle_adds(v, est, gt), 1e-12);
    EXPECT_NEAR(mssd(m, est, gt, sym), oracle_mssd(v, est, gt, syms), 1e-12);
    EXPECT_NEAR(mssd(m, est, gt, SymmetrySet()),
                oracle_mssd(v, est, gt, {Mat3::Identity()}), 1e-12);
    EXPECT_NEAR(mspd(m, est, gt, sym, kIntr), oracle_mspd(v, est, gt, syms, kIntr),
                1e-12);
  }
}

TEST(AddS, SymmetricBoxAbsorbsHalfTurn) {
  const TriangleMesh box = make_box_mesh(Vec3(0.3, 0.2, 0.1), 3);
  Rng rng(3);
  const RigidPose gt = front_pose(rng);
  const RigidPose est =
      gt * RigidPose(axis_rotation(Vec3::UnitZ(), std::numbers::pi), Vec3::Zero());
  EXPECT_LT(adds_metric(box, est, gt), 1e-12);
  EXPECT_GT(add_metric(box, est, gt), 0.1);
}

TEST(AddS, ExactOnFiftyVertices) {
  Rng rng(4);
  const TriangleMesh m = cloud_mesh(rng, 50);
  const RigidPose gt = front_pose(rng);
  const RigidPose est = front_pose(rng);
  EXPECT_NEAR(adds_metric(m, est, gt), oracle_adds(m.vertices(), est, gt), 1e-12);
  EXPECT_EQ(adds_metric(m, gt, gt), 0.0);
}

TEST(Mssd, SymmetryAbsorption) {
  const TriangleMesh box = make_box_mesh(Vec3(0.3, 0.2, 0.1), 2);
  const SymmetrySet sym = SymmetrySet::half_turn(Vec3::UnitZ());
  Rng rng(5);
  const RigidPose gt = front_pose(rng);
  EXPECT_EQ(mssd(box, gt, gt, SymmetrySet()), 0.0);
  const RigidPose est = gt * sym.as_pose(1);
  EXPECT_LT(mssd(box, est, gt, sym), 1e-9);
  EXPECT_LT(mspd(box, est, gt, sym, kIntr), 1e-6);
  EXPECT_GT(mssd(box, est, gt, SymmetrySet()), 0.1);
}

TEST(Mspd, OpticalAxisTranslation) {
  const std::vector<Vec3> on_axis{Vec3::Zero()};
  const CameraIntrinsics intr{500, 500, 320, 240, 640, 480};
  const RigidPose gt(Mat3::Identity(), Vec3(0, 0, 1.0));
  const RigidPose est(Mat3::Identity(), Vec3(0, 0, 1.5));
  EXPECT_EQ(mspd(on_axis, est, gt, SymmetrySet(), intr), 0.0);
  const std::vector<Vec3> off_axis{Vec3::Zero(), Vec3(0.1, 0, 0)};
  // 500 * 0.1 / 1.0 - 500 * 0.1 / 1.5 = 16.67 px.
  EXPECT_NEAR(mspd(off_axis, est, gt, SymmetrySet(), intr), 50.0 - 100.0 / 3.0,
              1e-12);
  EXPECT_EQ(mspd(off_axis, gt, gt, SymmetrySet(), intr), 0.0);
  const RigidPose behind(Mat3::Identity(), Vec3(0, 0, -1));
  try {
    mspd(off_axis, behind, gt, SymmetrySet(), intr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDepth);
  }
}

TEST(MetricInvariants, DominanceAndZeroAtIdentity) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const TriangleMesh m = cloud_mesh(rng, 60);
    const RigidPose gt = front_pose(rng);
    const RigidPose est = front_pose(rng);
    const double add = add_metric(m, est, gt);
    EXPECT_LE(adds_metric(m, est, gt), add);
    EXPECT_GE(mssd(m, est, gt, SymmetrySet()), add);
    EXPECT_LE(adds_metric(m, gt, gt), 1e-12);
    EXPECT_LE(mssd(m, gt, gt, SymmetrySet()), 1e-12);
    EXPECT_LE(mspd(m, gt, gt, SymmetrySet(), kIntr), 1e-12);
  }
}

TEST(Auc, EndpointsAndUniform) {
  const std::vector<double> zeros(100, 0.0);
  EXPECT_DOUBLE_EQ(auc(zeros, 0.1), 1.0);
  const std::vector<double> misses(100, 0.2);
  EXPECT_DOUBLE_EQ(auc(misses, 0.1), 0.0);
  Rng rng(7);
  std::vector<double> uniform;
  for (int i = 0; i < 100000; ++i) uniform.push_back(rng.uniform(0.0, 0.1));
  EXPECT_NEAR(auc(uniform, 0.1), 0.5, 0.01);
}

TEST(Auc, StaircaseHandValue) {
  // Recall 1/2 on [0.02, 0.06), 1 on [0.06, 0.1]: (0.04 * 0.5 + 0.04) / 0.1.
  const std::vector<double> e{0.02, 0.06};
  EXPECT_NEAR(auc(e, 0.1), 0.6, 1e-15);
}

TEST(Auc, NonIncreasingInEachError) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> e;
    for (int i = 0; i < 20; ++i) e.push_back(rng.uniform(0.0, 0.15));
    const double before = auc(e, 0.1);
    e[rng.uniform_index(20)] += rng.uniform(0.0, 0.05);
    EXPECT_LE(auc(e, 0.1), before + 1e-15);
  }
}

TEST(Auc, Errors) {
  const std::vector<double> none;
  try {
    auc(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  const std::vector<double> one{0.0};
  EXPECT_THROW(auc(one, 0.0), Error);
}

TEST(Recall, StrictlyBelowThreshold) {
  const std::vector<double> e{0.01, 0.02, 0.03, 0.04};
  EXPECT_DOUBLE_EQ(recall(e, 0.03), 0.5);
  EXPECT_DOUBLE_EQ(recall(e, 1.0), 1.0);
}

TEST(PoseErrors, RotationAndTranslation) {
  const RigidPose gt(Mat3::Identity(), Vec3(0, 0, 1));
  const RigidPose est(axis_rotation(Vec3::UnitX(), 0.1), Vec3(0, 0.003, 1.004));
  EXPECT_NEAR(rotation_error(est, gt), 0.1, 1e-12);
  EXPECT_NEAR(translation_error(est, gt), 0.005, 1e-12);
  const SymmetrySet sym = SymmetrySet::half_turn(Vec3::UnitZ());
  const RigidPose flipped(axis_rotation(Vec3::UnitZ(), std::numbers::pi), gt.translation());
  EXPECT_NEAR(rotation_error(flipped, gt), std::numbers::pi, 1e-9);
  EXPECT_LT(rotation_error(flipped, gt, sym), 1e-9);
}

TEST(EvaluatePose, ReportFieldsAndRecallFlag) {
  const TriangleMesh box = make_box_mesh(Vec3(0.3, 0.2, 0.1), 2);
  const SymmetrySet sym = SymmetrySet::half_turn(Vec3::UnitZ());
  const RigidPose gt(Mat3::Identity(), Vec3(0, 0, 1));
  const RigidPose flipped = gt * sym.as_pose(1);
  const MetricReport asym = evaluate_pose(box, flipped, gt, sym, kIntr, false);
  EXPECT_FALSE(asym.add_recall_10pct);
  EXPECT_LT(asym.mssd, 1e-9);
  const MetricReport symm = evaluate_pose(box, flipped, gt, sym, kIntr, true);
  EXPECT_TRUE(symm.add_recall_10pct);
  EXPECT_NEAR(symm.rotation_error_deg, 0.0, 1e-6);
  const MetricReport same = evaluate_pose(box, gt, gt, SymmetrySet(), kIntr, false);
  EXPECT_EQ(same.add, 0.0);
  EXPECT_EQ(same.adds, 0.0);
  EXPECT_EQ(same.mssd, 0.0);
  EXPECT_EQ(same.mspd, 0.0);
  EXPECT_TRUE(same.add_recall_10pct);
}

TEST(MetricPoints, StridesLargeMeshes) {
  Rng rng(9);
  const TriangleMesh big = cloud_mesh(rng, 25000);
  const MetricPoints mp = metric_points(big);
  EXPECT_EQ(mp.stride, 3u);
  EXPECT_EQ(mp.points.size(), 8334u);
  EXPECT_EQ(mp.points[1], big.vertices()[3]);
  const TriangleMesh small = cloud_mesh(rng, 100);
  EXPECT_EQ(metric_points(small).stride, 1u);
  EXPECT_EQ(metric_points(small).points.size(), 100u);
}

TEST(Percentiles, HandTable) {
  const std::vector<double> e{0.004, 0.001, 0.003, 0.002};
  const std::vector<double> q{50, 100};
  const auto rows = surface_error_percentiles(e, q);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].percentile, 50.0);
  EXPECT_NEAR(*rows[0].mean_error, 0.0015, 1e-15);
  EXPECT_EQ(rows[0].count, 2u);
  EXPECT_NEAR(*rows[1].mean_error, 0.0025, 1e-15);
  EXPECT_EQ(rows[1].count, 4u);
}

TEST(Percentiles, ConstantErrorsAreFlat) {
  const std::vector<double> e(37, 0.0042);
  for (const PercentileRow& r : surface_error_percentiles(e, kDefaultPercentiles)) {
    EXPECT_NEAR(*r.mean_error, 0.0042, 1e-15);
  }
}

TEST(Percentiles, FilterRemovesEverything) {
  const std::vector<double> e{0.011, 0.02, 0.5};
  const auto rows = surface_error_percentiles(e, kDefaultPercentiles, 0.010);
  for (const PercentileRow& r : rows) {
    EXPECT_EQ(r.count, 0u);
    EXPECT_FALSE(r.mean_error.has_value());
  }
}

TEST(Percentiles, MonotoneAndFilteredBelowUnfiltered) {
  Rng rng(10);
  std::vector<double> e;
  for (int i = 0; i < 5000; ++i) {
    e.push_back(i % 10 == 0 ? rng.uniform(0.01, 0.2) : std::abs(0.002 * rng.gaussian()));
  }
  const auto raw = surface_error_percentiles(e, kDefaultPercentiles);
  const auto filtered = surface_error_percentiles(e, kDefaultPercentiles, 0.010);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (i > 0) {
      EXPECT_GE(*raw[i].mean_error, *raw[i - 1].mean_error);
      EXPECT_GE(*filtered[i].mean_error, *filtered[i - 1].mean_error);
    }
    EXPECT_LE(*filtered[i].mean_error, *raw[i].mean_error);
  }
}

TEST(Percentiles, Errors) {
  const std::vector<double> none;
  try {
    surface_error_percentiles(none, kDefaultPercentiles);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyEstimate);
  }
  const std::vector<double> e{0.001};
  const std::vector<double> descending{50, 25};
  EXPECT_THROW(surface_error_percentiles(e, descending), Error);
  const std::vector<double> zero{0};
  EXPECT_THROW(surface_error_percentiles(e, zero), Error);
  const std::vector<double> over{101};
  EXPECT_THROW(surface_error_percentiles(e, over), Error);
}

TEST(SurfaceErrors, SkipsPixelsOutsideGroundTruth) {
  PointImage gt;
  gt.width = 3;
  gt.height = 1;
  gt.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0)};
  gt.mask = SegMask(3, 1);
  gt.mask.set(0, 0, true);
  gt.mask.set(2, 0, true);
  SurfaceEstimate est;
  est.pixels = {{0, 0}, {1, 0}, {2, 0}};
  est.points_obj = {Vec3(0.003, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0.004)};
  est.points_cam = est.points_obj;
  est.residuals = {0, 0, 0};
  const auto errs = surface_errors(est, gt);
  ASSERT_EQ(errs.size(), 2u);
  EXPECT_NEAR(errs[0], 0.003, 1e-15);
  EXPECT_NEAR(errs[1], 0.004, 1e-15);
  est.pixels[1] = {5, 0};
  try {
    surface_errors(est, gt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

}  // namespace
}  // namespace radialdlt
