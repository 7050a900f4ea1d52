#include <gtest/gtest.h>

#include <json.hpp>

#include "radialdlt/experiment.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/parallel.hpp"

namespace radialdlt {
namespace {

struct Fixture {
  TriangleMesh mesh = make_blob_mesh(0.05, 24, 48, 7);
  KeypointSet kps;
  std::vector<RigidPose> poses;

  explicit Fixture(int frames) {
    const OrientedBox box = compute_obb(mesh);
    kps = symmetric_keypoints(box, default_keypoint_offset(box));
    PoseSampling s;
    s.count = frames;
    poses = sample_poses(mesh, CameraIntrinsics::linemod(), s);
  }
};

TEST(PoseSampling, PosesKeepTheObjectInView) {
  const TriangleMesh mesh = make_blob_mesh(0.05, 12, 24, 7);
  const CameraIntrinsics intr = CameraIntrinsics::linemod();
  PoseSampling s;
  s.count = 30;
  const auto poses = sample_poses(mesh, intr, s);
  ASSERT_EQ(poses.size(), 30u);
  for (const RigidPose& p : poses) {
    EXPECT_GE(p.translation().z(), s.z_min);
    EXPECT_LE(p.translation().z(), s.z_max);
    for (const Vec3& v : mesh.vertices()) {
      const PixelCoord px = project(intr, p.apply(v));
      EXPECT_GE(px.u, s.margin_px);
      EXPECT_LE(px.u, intr.width - 1 - s.margin_px);
      EXPECT_GE(px.v, s.margin_px);
      EXPECT_LE(px.v, intr.height - 1 - s.margin_px);
    }
  }
  const auto again = sample_poses(mesh, intr, s);
  EXPECT_EQ(again[7].translation(), poses[7].translation());
  s.z_min = 0.01;
  s.z_max = 0.02;
  EXPECT_THROW(sample_poses(mesh, intr, s), Error);
}

TEST(NoiseTarget, Names) {
  EXPECT_EQ(noise_target_from_string("surface"), NoiseTarget::kSurface);
  EXPECT_EQ(noise_target_from_string(to_string(NoiseTarget::kRadial)),
            NoiseTarget::kRadial);
  EXPECT_THROW(noise_target_from_string("depth"), Error);
}

TEST(Experiment, NoiselessRunIsNearExact) {
  const Fixture f(12);
  ExperimentOptions opts;
  const ExperimentResult r = run_experiment(f.mesh, f.kps, f.poses, opts);
  ASSERT_EQ(r.summaries.size(), 1u);
  const SigmaSummary& s = r.summaries[0];
  EXPECT_EQ(s.succeeded, 12);
  EXPECT_LT(s.without_icp.median_rotation_error_deg, 0.01);
  EXPECT_LT(s.without_icp.median_translation_error_m, 1e-4);
  EXPECT_LT(s.without_icp.median_add, 1e-4);
  EXPECT_LT(s.mean_recovery_error_m, 1e-6);
  ASSERT_TRUE(s.with_icp.has_value());
  EXPECT_LT(s.with_icp->median_add, 1e-4);
  EXPECT_DOUBLE_EQ(baseline_success_rate(r), 1.0);
  for (const FrameResult& fr : r.frames) {
    EXPECT_TRUE(fr.ok) << fr.failure;
    EXPECT_EQ(fr.solved_pixels, fr.mask_pixels);
  }
}

TEST(Experiment, SweepDegradesAndIcpHelps) {
  const Fixture f(10);
  ExperimentOptions opts;
  opts.sigmas_mm = {0, 1, 2, 4, 8};
  const ExperimentResult r = run_experiment(f.mesh, f.kps, f.poses, opts);
  ASSERT_EQ(r.summaries.size(), 5u);
  ASSERT_EQ(r.frames.size(), 50u);
  for (size_t i = 1; i < r.summaries.size(); ++i) {
    const SigmaSummary& a = r.summaries[i - 1];
    const SigmaSummary& b = r.summaries[i];
    EXPECT_GE(b.without_icp.mean_mssd, a.without_icp.mean_mssd);
    EXPECT_GE(b.mean_recovery_error_m, a.mean_recovery_error_m);
  }
  const SigmaSummary& at4 = r.summaries[3];
  EXPECT_EQ(at4.sigma_mm, 4.0);
  EXPECT_LE(at4.with_icp->mean_add, at4.without_icp.mean_add);
}

TEST(Experiment, RadialNoiseTargetAlsoDegrades) {
  const Fixture f(6);
  ExperimentOptions opts;
  opts.sigmas_mm = {0, 2, 8};
  opts.noise_target = NoiseTarget::kRadial;
  opts.icp = false;
  const ExperimentResult r = run_experiment(f.mesh, f.kps, f.poses, opts);
  EXPECT_FALSE(r.summaries[0].with_icp.has_value());
  EXPECT_LT(r.summaries[0].mean_recovery_error_m, r.summaries[1].mean_recovery_error_m);
  EXPECT_LT(r.summaries[1].mean_recovery_error_m, r.summaries[2].mean_recovery_error_m);
}

TEST(Experiment, OutputsDoNotDependOnThreadCount) {
  const Fixture f(4);
  ExperimentOptions opts;
  opts.sigmas_mm = {0, 4};
  set_thread_count(1);
  const ExperimentResult a = run_experiment(f.mesh, f.kps, f.poses, opts);
  set_thread_count(3);
  const ExperimentResult b = run_experiment(f.mesh, f.kps, f.poses, opts);
  set_thread_count(0);
  EXPECT_EQ(frames_csv(a), frames_csv(b));
  EXPECT_EQ(sweep_csv(a), sweep_csv(b));
  EXPECT_EQ(summary_json(a), summary_json(b));
}

TEST(Experiment, WritersEmitOneRowPerFrameAndSigma) {
  const Fixture f(3);
  ExperimentOptions opts;
  opts.sigmas_mm = {0, 2};
  const ExperimentResult r = run_experiment(f.mesh, f.kps, f.poses, opts);
  const std::string frames = frames_csv(r);
  EXPECT_EQ(std::count(frames.begin(), frames.end(), '\n'), 1 + 6);
  EXPECT_EQ(frames.rfind("frame,", 0), 0u);
  const std::string sweep = sweep_csv(r);
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 1 + 2);
  const auto j = nlohmann::json::parse(summary_json(r));
  ASSERT_EQ(j["sigmas"].size(), 2u);
  EXPECT_EQ(j["sigmas"][1]["sigma_mm"].get<double>(), 2.0);
  EXPECT_TRUE(j["sigmas"][0]["with_icp"].is_object());
}

TEST(Ablation, RowsForEveryKeypointCount) {
  const Fixture f(4);
  ExperimentOptions opts;
  opts.icp = false;
  const auto rows = run_keypoint_ablation(f.mesh, f.poses, {4, 8, 12, 16}, opts);
  ASSERT_EQ(rows.size(), 4u);
  for (const AblationRow& row : rows) {
    EXPECT_EQ(row.summary.succeeded, 4);
    EXPECT_LT(row.summary.mean_recovery_error_m, 1e-6);
  }
  EXPECT_EQ(rows[2].n_k, 12);
  const std::string csv = ablation_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

}  // namespace
}  // namespace radialdlt
