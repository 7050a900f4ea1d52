#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "radialdlt/io.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/oracle.hpp"
#include "test_support.hpp"

namespace radialdlt {
namespace {

using nlohmann::json;
using testing_support::TempDir;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "radialdlt");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

TEST(Cli, GenKeypointsOnUnitCube) {
  TempDir dir;
  save_obj(dir / "cube.obj", make_box_mesh(Vec3(1, 1, 1)));
  const CliRun r = run({"gen-keypoints", "--mesh", (dir / "cube.obj").string(),
                     "--d", "0.5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["points"].size(), 4u);
  EXPECT_EQ(j["pairs"], json::parse("[[0,1],[2,3]]"));
  EXPECT_EQ(j["units"], "m");
  for (const auto& p : j["points"]) {
    const Vec3 v(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    EXPECT_NEAR(v.norm(), 0.5, 1e-9);
  }
  const CliRun sym = run({"gen-keypoints", "--mesh", (dir / "cube.obj").string(),
                       "--symmetric", "--out", (dir / "k.json").string()});
  ASSERT_EQ(sym.code, cli::kExitOk) << sym.err;
  EXPECT_EQ(load_keypoints(dir / "k.json").symmetries.size(), 2u);
  const CliRun fps = run({"gen-keypoints", "--mesh", (dir / "cube.obj").string(),
                       "--nk", "6"});
  ASSERT_EQ(fps.code, cli::kExitOk) << fps.err;
  EXPECT_EQ(json::parse(fps.out)["points"].size(), 6u);
}

TEST(Cli, BadMeshNamesTheLine) {
  TempDir dir;
  std::ofstream(dir / "bad.obj") << "v 0 0 0\nv 1 0 0\nthis is not a mesh\n";
  const CliRun r = run({"gen-keypoints", "--mesh", (dir / "bad.obj").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, MissingFileAndUsageErrors) {
  TempDir dir;
  EXPECT_EQ(run({"gen-keypoints", "--mesh", (dir / "none.obj").string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen-keypoints"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen-keypoints", "--mesh", "x.obj", "--nk", "2"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, RenderSolveFitEvalChain) {
  TempDir dir;
  const TriangleMesh mesh = make_blob_mesh(0.05, 24, 48, 7);
  save_obj(dir / "blob.obj", mesh);
  const RigidPose gt(Rng(3).random_rotation(), Vec3(0.01, 0.02, 0.7));
  save_pose(dir / "gt.json", gt);
  ASSERT_EQ(run({"gen-keypoints", "--mesh", (dir / "blob.obj").string(), "--out",
                 (dir / "k.json").string()})
                .code,
            0);
  const CliRun rd = run({"render", "--mesh", (dir / "blob.obj").string(), "--pose",
                      (dir / "gt.json").string(), "--keypoints",
                      (dir / "k.json").string(), "--out", (dir / "r").string()});
  ASSERT_EQ(rd.code, 0) << rd.err;
  EXPECT_EQ(rd.out.rfind("mask_pixels ", 0), 0u);
  for (const char* f : {"depth.rmap", "points.rmap", "coords.rmap", "radial.rmap"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "r" / f)) << f;
  }
  const CliRun sv = run({"solve", "--radial", (dir / "r" / "radial.rmap").string(),
                      "--depth", (dir / "r" / "depth.rmap").string(), "--keypoints",
                      (dir / "k.json").string(), "--out",
                      (dir / "surface.csv").string()});
  ASSERT_EQ(sv.code, 0) << sv.err;
  EXPECT_NE(sv.err.find("skipped 0"), std::string::npos) << sv.err;
  const CliRun ft = run({"fit", "--surface", (dir / "surface.csv").string(), "--out",
                      (dir / "est.json").string()});
  ASSERT_EQ(ft.code, 0) << ft.err;
  EXPECT_NE(ft.out.find("axis_angle_deg"), std::string::npos);
  const RigidPose est = load_pose(dir / "est.json");
  EXPECT_LT(rotation_angle_between(est.rotation(), gt.rotation()), 1e-6);
  EXPECT_LT((est.translation() - gt.translation()).norm(), 1e-6);
  const CliRun ev = run({"eval", "--mesh", (dir / "blob.obj").string(), "--pose-est",
                      (dir / "est.json").string(), "--pose-gt",
                      (dir / "gt.json").string(), "--require-recall"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_LT(json::parse(ev.out)["add_m"].get<double>(), 1e-6);

  // A far-off estimate fails the recall requirement with exit code 1.
  save_pose(dir / "far.json", RigidPose(gt.rotation(), gt.translation() + Vec3(0.1, 0, 0)));
  EXPECT_EQ(run({"eval", "--mesh", (dir / "blob.obj").string(), "--pose-est",
                 (dir / "far.json").string(), "--pose-gt", (dir / "gt.json").string(),
                 "--require-recall"})
                .code,
            cli::kExitMetricFailure);

  const CliRun fi = run({"fit", "--surface", (dir / "surface.csv").string(), "--icp",
                      "--mesh", (dir / "blob.obj").string()});
  ASSERT_EQ(fi.code, 0) << fi.err;

  const CliRun sa = run({"surface-analysis", "--estimate",
                      (dir / "surface.csv").string(), "--gt",
                      (dir / "r" / "points.rmap").string()});
  ASSERT_EQ(sa.code, 0) << sa.err;
  const auto lines = csv_lines(sa.out);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "percentile,mean_error_mm,count,filtered");
}

TEST(Cli, PipelineIsReproducibleUnderDeterministic) {
  TempDir dir;
  save_obj(dir / "blob.obj", make_blob_mesh(0.05, 16, 32, 7));
  const auto pipeline = [&](const std::string& out) {
    return run({"pipeline", "--mesh", (dir / "blob.obj").string(), "--frames", "3",
                "--sigma", "0,2", "--icp", "--deterministic", "--seed", "5",
                "--out", (dir / out).string()});
  };
  const CliRun a = pipeline("a");
  const CliRun b = pipeline("b");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"frames.csv", "sweep.csv", "summary.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_NE(slurp(dir / "a" / "frames.csv").rfind("frame,", 0), std::string::npos);

  const json cfg = json::parse(slurp(dir / "a" / "config.json"));
  EXPECT_EQ(cfg["sigmas_mm"], json::parse("[0.0, 2.0]"));
  EXPECT_EQ(cfg["seed"], 5);
  EXPECT_EQ(cfg["icp"], true);
  EXPECT_EQ(cfg["ransac"]["max_iterations"], 1000);
  EXPECT_DOUBLE_EQ(cfg["ransac"]["inlier_threshold_m"].get<double>(), 0.005);
  EXPECT_EQ(cfg["noise_target"], "surface");
  EXPECT_EQ(cfg["keypoints"]["points"].size(), 4u);

  const CliRun stamped = run({"pipeline", "--mesh", (dir / "blob.obj").string(),
                           "--frames", "2", "--out", (dir / "c").string()});
  ASSERT_EQ(stamped.code, 0) << stamped.err;
  EXPECT_EQ(slurp(dir / "c" / "frames.csv").rfind("# generated ", 0), 0u);
}

TEST(Cli, SweepWritesAblation) {
  TempDir dir;
  save_obj(dir / "blob.obj", make_blob_mesh(0.05, 16, 32, 7));
  const CliRun r = run({"sweep", "--mesh", (dir / "blob.obj").string(), "--frames", "2",
                     "--sigma", "0,4", "--nk-grid", "4,8", "--deterministic",
                     "--out", (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = csv_lines(slurp(dir / "s" / "ablation.csv"));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].rfind("4,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("8,", 0), 0u);
  EXPECT_EQ(csv_lines(slurp(dir / "s" / "sweep.csv")).size(), 3u);
}

TEST(Cli, PipelineMetricFailureExitCode) {
  TempDir dir;
  save_obj(dir / "blob.obj", make_blob_mesh(0.05, 16, 32, 7));
  // An impossible success requirement turns a clean run into exit code 1.
  const CliRun r = run({"pipeline", "--mesh", (dir / "blob.obj").string(), "--frames",
                     "2", "--min-success", "1.5", "--out", (dir / "p").string()});
  EXPECT_EQ(r.code, cli::kExitMetricFailure);
}

void write_points(const std::filesystem::path& path, const std::vector<Vec3>& pts,
                  const std::vector<bool>& mask) {
  PointImage img;
  img.width = static_cast<int>(pts.size());
  img.height = 1;
  img.points = pts;
  img.mask = SegMask(img.width, 1);
  for (int u = 0; u < img.width; ++u) img.mask.set(u, 0, mask[u]);
  save_rmap(path, points_to_map(img));
}

TEST(Cli, SurfaceAnalysisHandTable) {
  TempDir dir;
  write_points(dir / "gt.rmap", {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()},
               {true, true, true, true});
  SurfaceEstimate est;
  for (int i = 0; i < 4; ++i) {
    est.pixels.push_back({i, 0});
    est.points_obj.push_back(Vec3(0.001 * (i + 1), 0, 0));
    est.points_cam.push_back(Vec3(0, 0, 1));
    est.residuals.push_back(0.0);
  }
  save_surface(dir / "est.csv", est);
  const CliRun r = run({"surface-analysis", "--estimate", (dir / "est.csv").string(),
                     "--gt", (dir / "gt.rmap").string(), "--percentiles", "50,100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = csv_lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  const auto cells = [](const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string c;
    while (std::getline(in, c, ',')) out.push_back(c);
    return out;
  };
  const auto row50 = cells(lines[1]);
  EXPECT_EQ(row50[0], "50");
  EXPECT_NEAR(std::stod(row50[1]), 1.5, 1e-12);
  EXPECT_EQ(row50[2], "2");
  EXPECT_EQ(row50[3], "0");
  const auto row100 = cells(lines[2]);
  EXPECT_NEAR(std::stod(row100[1]), 2.5, 1e-12);
  EXPECT_EQ(row100[2], "4");
  EXPECT_EQ(cells(lines[3])[3], "1");
}

TEST(Cli, SurfaceAnalysisEmptyOverlapIsHeaderOnly) {
  TempDir dir;
  write_points(dir / "gt.rmap", {Vec3::Zero(), Vec3::Zero()}, {false, false});
  SurfaceEstimate est;
  est.pixels = {{0, 0}, {1, 0}};
  est.points_obj = {Vec3::Zero(), Vec3::Zero()};
  est.points_cam = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  est.residuals = {0, 0};
  save_surface(dir / "est.bin", est);
  const CliRun r = run({"surface-analysis", "--estimate", (dir / "est.bin").string(),
                     "--gt", (dir / "gt.rmap").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "percentile,mean_error_mm,count,filtered\n");
}

TEST(Cli, LossesJson) {
  TempDir dir;
  ChannelMap gt;
  gt.width = 2;
  gt.height = 2;
  gt.channels = 4;
  gt.values.assign(16, 1.0);
  gt.mask = SegMask(2, 2);
  for (size_t i = 0; i < 4; ++i) gt.mask.set_index(i, true);
  ChannelMap pred = gt;
  for (double& v : pred.values) v += 0.5;
  save_rmap(dir / "gt.rmap", gt);
  save_rmap(dir / "pred.rmap", pred);
  const CliRun r = run({"losses", "--pred", (dir / "pred.rmap").string(), "--gt",
                     (dir / "gt.rmap").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["radial"].get<double>(), 0.5);
  EXPECT_TRUE(j["coord"].is_null());
  EXPECT_NEAR(j["total"].get<double>(), 0.3, 1e-15);

  const CliRun bad = run({"losses", "--pred", (dir / "pred.rmap").string(), "--gt",
                       (dir / "gt.rmap").string(), "--weights", "1,2"});
  EXPECT_EQ(bad.code, cli::kExitUsage);
}

}  // namespace
}  // namespace radialdlt
