#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radialdlt/bvh.hpp"
#include "radialdlt/dlt.hpp"
#include "radialdlt/experiment.hpp"
#include "radialdlt/io.hpp"
#include "radialdlt/keypoints.hpp"
#include "radialdlt/losses.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/metrics.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/posefit.hpp"

namespace radialdlt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

void emit(const Streams& io, const std::string& path, const std::string& text) {
  if (path.empty()) {
    io.out << text;
  } else {
    write_text_file(path, text);
  }
}

CameraIntrinsics intrinsics_or_default(const std::string& path) {
  return path.empty() ? CameraIntrinsics::linemod() : load_intrinsics(path);
}

std::string timestamp_line() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return std::string("# generated ") + buf + "\n";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "cannot create directory " + dir);
  }
}

// gen-keypoints

struct GenKeypointsArgs {
  std::string mesh;
  std::optional<double> d;
  int nk = 4;
  bool symmetric = false;
  std::string out;
};

int cmd_gen_keypoints(const GenKeypointsArgs& a, const Streams& io) {
  const TriangleMesh mesh = load_mesh(a.mesh);
  KeypointSet kps;
  if (a.nk == 4) {
    const OrientedBox box = compute_obb(mesh);
    kps = symmetric_keypoints(box, a.d ? *a.d : default_keypoint_offset(box));
    if (a.symmetric) kps.symmetries = SymmetrySet::half_turn(box.axes.col(2));
  } else {
    if (a.d) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--d applies to the 4 box keypoints only");
    }
    if (a.symmetric) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--symmetric needs the 4 paired box keypoints");
    }
    kps = farthest_point_keypoints(mesh, a.nk);
  }
  emit(io, a.out, keypoints_to_json(kps));
  return kExitOk;
}

// render

struct RenderArgs {
  std::string mesh, pose, intrinsics, keypoints, out;
  double sigma_mm = 0.0;
  std::uint64_t seed = 1;
};

int cmd_render(const RenderArgs& a, const Streams& io) {
  const TriangleMesh mesh = load_mesh(a.mesh);
  const RigidPose pose = load_pose(a.pose);
  const CameraIntrinsics intr = intrinsics_or_default(a.intrinsics);
  ensure_dir(a.out);
  const RenderResult r = render(mesh, pose, intr);
  const fs::path dir(a.out);
  save_rmap(dir / "depth.rmap", depth_to_map(r.depth));
  save_rmap(dir / "points.rmap", points_to_map(r.points_obj));
  save_rmap(dir / "coords.rmap", normalized_coords(r.points_obj, mesh, r.mask));
  if (!a.keypoints.empty()) {
    const KeypointSet kps = load_keypoints(a.keypoints);
    RadialMapStack stack = radial_maps(r.points_obj, kps, r.mask);
    if (kps.symmetries.size() > 1 && !kps.pairs.empty()) {
      stack = reorder_channels(stack, order_channels(kps, pose));
    }
    // mm -> dm.
    save_rmap(dir / "radial.rmap",
              inject_noise(stack, a.sigma_mm / 100.0, a.seed));
  }
  io.out << "mask_pixels " << r.mask.count() << "\n";
  return kExitOk;
}

// solve

struct SolveArgs {
  std::string radial, depth, keypoints, intrinsics, out;
  double radial_sigma_dm = 0.05;
  bool keep_inconsistent = false;
};

int cmd_solve(const SolveArgs& a, const Streams& io) {
  const ChannelMap rm = load_rmap(a.radial);
  RadialMapStack stack;
  static_cast<ChannelMap&>(stack) = rm;
  const DepthImage depth = map_to_depth(load_rmap(a.depth));
  const KeypointSet kps = load_keypoints(a.keypoints);
  DltOptions opts;
  opts.radial_sigma_dm = a.radial_sigma_dm;
  opts.keep_inconsistent = a.keep_inconsistent;
  const SurfaceSolve s = solve_surface(stack, kps, depth,
                                       intrinsics_or_default(a.intrinsics),
                                       opts);
  if (a.out.empty()) {
    write_surface_csv(io.out, s.estimate);
  } else {
    save_surface(a.out, s.estimate);
  }
  io.err << "mask_pixels " << s.stats.mask_pixels << " solved "
         << s.stats.solved << " skipped " << s.stats.skipped()
         << " (inconsistent " << s.stats.skipped_inconsistent
         << ", degenerate " << s.stats.skipped_degenerate << ", no_depth "
         << s.stats.skipped_no_depth << ", invalid "
         << s.stats.skipped_invalid << ")\n";
  return kExitOk;
}

// fit

struct FitArgs {
  std::string surface, mesh, out;
  double ransac_thresh_mm = 5.0;
  int iterations = 1000;
  std::uint64_t seed = 1;
  bool icp = false;
};

int cmd_fit(const FitArgs& a, const Streams& io) {
  const SurfaceEstimate est = load_surface(a.surface);
  RansacConfig cfg;
  cfg.inlier_threshold = a.ransac_thresh_mm / 1000.0;
  cfg.max_iterations = a.iterations;
  cfg.seed = a.seed;
  const PoseResult fit = ransac_pose(est, cfg);
  RigidPose pose = fit.pose;
  if (a.icp) {
    if (a.mesh.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--icp needs --mesh");
    }
    const TriangleBvh bvh(load_mesh(a.mesh));
    pose = icp_refine_to_surface(pose, est.points_cam, bvh).pose;
  }
  const std::string text = pose_to_json(pose);
  if (!a.out.empty()) write_text_file(a.out, text);
  const Vec3 aa = rotation_to_axis_angle(pose.rotation());
  io.out << text;
  io.out << "axis_angle_deg " << format_double(aa.norm() * 180.0 / std::numbers::pi)
         << " axis ";
  const Vec3 axis = aa.norm() > 0.0 ? Vec3(aa.normalized()) : Vec3::UnitZ();
  io.out << format_double(axis.x()) << ' ' << format_double(axis.y()) << ' '
         << format_double(axis.z()) << "\n";
  io.err << "inliers " << fit.inlier_count << "/" << est.size() << " rms_m "
         << format_double(fit.inlier_rms) << " iterations "
         << fit.iterations_used << "\n";
  return kExitOk;
}

// eval

struct EvalArgs {
  std::string mesh, pose_est, pose_gt, keypoints, intrinsics;
  bool symmetric = false;
  bool require_recall = false;
};

int cmd_eval(const EvalArgs& a, const Streams& io) {
  const TriangleMesh mesh = load_mesh(a.mesh);
  const SymmetrySet sym =
      a.keypoints.empty() ? SymmetrySet{} : load_keypoints(a.keypoints).symmetries;
  const MetricReport r =
      evaluate_pose(mesh, load_pose(a.pose_est), load_pose(a.pose_gt), sym,
                    intrinsics_or_default(a.intrinsics), a.symmetric);
  const json j{{"add_m", r.add},
               {"adds_m", r.adds},
               {"add_recall_10pct", r.add_recall_10pct},
               {"mssd_m", r.mssd},
               {"mspd_px", r.mspd},
               {"rotation_error_deg", r.rotation_error_deg},
               {"translation_error_m", r.translation_error_m}};
  io.out << j.dump(2) << "\n";
  if (a.require_recall && !r.add_recall_10pct) return kExitMetricFailure;
  return kExitOk;
}

// pipeline / sweep

struct ExperimentArgs {
  std::string mesh, keypoints, poses, intrinsics, out;
  std::optional<double> d;
  int nk = 4;
  int frames = 50;
  std::uint64_t seed = 1;
  std::vector<double> sigmas;
  std::string noise_target = "surface";
  bool icp = false;
  bool symmetric = false;
  double ransac_thresh_mm = 5.0;
  int ransac_iterations = 1000;
  double z_min = 0.6;
  double z_max = 1.0;
  bool deterministic = false;
  double min_success = 0.9;
  std::vector<int> nk_grid;
};

json resolved_config(const ExperimentArgs& a, const ExperimentOptions& o,
                     const KeypointSet& kps, size_t n_poses) {
  json j;
  j["mesh"] = fs::absolute(a.mesh).lexically_normal().string();
  j["keypoints"] = json::parse(keypoints_to_json(kps));
  j["keypoint_source"] = a.keypoints.empty() ? "generated" : a.keypoints;
  j["pose_source"] = a.poses.empty() ? json{{"sampled", n_poses},
                                             {"seed", a.seed},
                                             {"z_min_m", a.z_min},
                                             {"z_max_m", a.z_max}}
                                      : json(a.poses);
  j["intrinsics"] = json::parse(intrinsics_to_json(o.intrinsics));
  j["sigmas_mm"] = o.sigmas_mm;
  j["noise_target"] = to_string(o.noise_target);
  j["seed"] = o.seed;
  j["ransac"] = {{"max_iterations", o.ransac.max_iterations},
                 {"inlier_threshold_m", o.ransac.inlier_threshold},
                 {"sample_size", o.ransac.sample_size},
                 {"min_inlier_fraction", o.ransac.min_inlier_fraction},
                 {"confidence", o.ransac.confidence},
                 {"sigma_factor", o.ransac_sigma_factor}};
  j["icp"] = o.icp;
  j["icp_options"] = {{"max_iterations", o.icp_options.max_iterations},
                      {"tolerance_m", o.icp_options.tolerance}};
  j["dlt"] = {{"radial_sigma_dm", o.dlt.radial_sigma_dm},
              {"keep_inconsistent", o.dlt.keep_inconsistent}};
  j["symmetric_object"] = o.symmetric_object;
  j["add_threshold_fraction"] = o.add_threshold_fraction;
  j["mssd_grid_fraction_of_diameter"] = o.mssd_grid;
  j["mspd_grid_px_at_640"] = o.mspd_grid;
  j["nk_grid"] = a.nk_grid;
  j["min_success"] = a.min_success;
  j["deterministic"] = a.deterministic;
  j["output_dir"] = a.out;
  return j;
}

int cmd_experiment(const ExperimentArgs& a, const Streams& io) {
  const TriangleMesh mesh = load_mesh(a.mesh);
  ExperimentOptions o;
  o.intrinsics = intrinsics_or_default(a.intrinsics);
  o.sigmas_mm = a.sigmas;
  o.noise_target = noise_target_from_string(a.noise_target);
  o.seed = a.seed;
  o.ransac.inlier_threshold = a.ransac_thresh_mm / 1000.0;
  o.ransac.max_iterations = a.ransac_iterations;
  o.icp = a.icp;
  o.symmetric_object = a.symmetric;

  KeypointSet kps;
  if (!a.keypoints.empty()) {
    kps = load_keypoints(a.keypoints);
  } else if (a.nk == 4) {
    const OrientedBox box = compute_obb(mesh);
    kps = symmetric_keypoints(box, a.d ? *a.d : default_keypoint_offset(box));
  } else {
    kps = farthest_point_keypoints(mesh, a.nk);
  }

  std::vector<RigidPose> poses;
  if (!a.poses.empty()) {
    poses = load_poses(a.poses);
  } else {
    PoseSampling ps;
    ps.count = a.frames;
    ps.seed = a.seed;
    ps.z_min = a.z_min;
    ps.z_max = a.z_max;
    poses = sample_poses(mesh, o.intrinsics, ps);
  }

  ensure_dir(a.out);
  const fs::path dir(a.out);
  write_text_file(dir / "config.json",
                  resolved_config(a, o, kps, poses.size()).dump(2) + "\n");
  const ExperimentResult r = run_experiment(mesh, kps, poses, o);
  const std::string stamp = a.deterministic ? "" : timestamp_line();
  write_text_file(dir / "frames.csv", stamp + frames_csv(r));
  write_text_file(dir / "sweep.csv", stamp + sweep_csv(r));
  write_text_file(dir / "summary.json", summary_json(r));
  if (!a.nk_grid.empty()) {
    const auto rows = run_keypoint_ablation(mesh, poses, a.nk_grid, o);
    write_text_file(dir / "ablation.csv", stamp + ablation_csv(rows));
  }
  for (const SigmaSummary& s : r.summaries) {
    io.out << "sigma_mm " << format_double(s.sigma_mm) << " succeeded "
           << s.succeeded << "/" << s.frames << " mean_mssd_m "
           << format_double(s.without_icp.mean_mssd);
    if (s.with_icp) {
      io.out << " icp_mean_mssd_m " << format_double(s.with_icp->mean_mssd);
    }
    io.out << "\n";
  }
  const double rate = baseline_success_rate(r);
  if (rate < a.min_success) {
    io.err << "baseline success rate " << format_double(rate) << " below "
           << format_double(a.min_success) << "\n";
    return kExitMetricFailure;
  }
  return kExitOk;
}

// surface-analysis

struct SurfaceAnalysisArgs {
  std::string estimate, gt, out;
  std::vector<double> percentiles{10, 25, 50, 75, 100};
  double filter_mm = 10.0;
};

int cmd_surface_analysis(const SurfaceAnalysisArgs& a, const Streams& io) {
  const SurfaceEstimate est = load_surface(a.estimate);
  const PointImage gt = map_to_points(load_rmap(a.gt));
  const std::vector<double> errors = surface_errors(est, gt);
  std::ostringstream csv;
  csv << "percentile,mean_error_mm,count,filtered\n";
  size_t filtered_total = 0;
  for (double e : errors) filtered_total += e <= a.filter_mm / 1000.0 ? 1 : 0;
  if (!errors.empty()) {
    for (bool filtered : {false, true}) {
      const auto rows = surface_error_percentiles(
          errors, a.percentiles,
          filtered ? std::optional<double>(a.filter_mm / 1000.0)
                   : std::nullopt);
      for (const PercentileRow& r : rows) {
        csv << format_double(r.percentile) << ','
            << (r.mean_error ? format_double(*r.mean_error * 1000.0) : "")
            << ',' << r.count << ',' << (filtered ? 1 : 0) << '\n';
      }
    }
  }
  emit(io, a.out, csv.str());
  io.err << "points " << errors.size() << " within_filter " << filtered_total
         << "\n";
  return kExitOk;
}

// losses

struct LossesArgs {
  std::string pred, gt, pred_coords, gt_coords, mesh, keypoints;
  int bins = kDefaultBins;
  std::vector<double> weights{0.6, 0.2, 0.2};
};

int cmd_losses(const LossesArgs& a, const Streams& io) {
  RadialMapStack pred, gt;
  static_cast<ChannelMap&>(pred) = load_rmap(a.pred);
  static_cast<ChannelMap&>(gt) = load_rmap(a.gt);
  const double lr = radial_loss(pred, gt);
  double lc = 0.0, lp = 0.0;
  const bool coords = !a.pred_coords.empty() || !a.gt_coords.empty();
  if (coords) {
    if (a.pred_coords.empty() || a.gt_coords.empty() || a.mesh.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "coordinate losses need --pred-coords, --gt-coords and "
                  "--mesh");
    }
    NormalizedCoordMap pc, gc;
    static_cast<ChannelMap&>(pc) = load_rmap(a.pred_coords);
    static_cast<ChannelMap&>(gc) = load_rmap(a.gt_coords);
    const SymmetrySet sym = a.keypoints.empty()
                                ? SymmetrySet{}
                                : load_keypoints(a.keypoints).symmetries;
    lc = coord_loss(pc, gc);
    lp = pseudo_symmetric_loss(pc, gc, sym, a.bins, load_mesh(a.mesh));
  }
  if (a.weights.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "--weights needs 3 values");
  }
  const LossWeights w{a.weights[0], a.weights[1], a.weights[2]};
  const json j{{"radial", lr},
               {"coord", coords ? json(lc) : json(nullptr)},
               {"pseudo_symmetric", coords ? json(lp) : json(nullptr)},
               {"total", total_loss(lr, lc, lp, w)}};
  io.out << j.dump(2) << "\n";
  return kExitOk;
}

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
  sub->add_option("--mesh", a.mesh, "Object mesh (.obj/.ply, meters)")
      ->required();
  sub->add_option("--keypoints", a.keypoints, "Keypoint JSON");
  sub->add_option("--d", a.d, "Keypoint offset for generated box keypoints (m)");
  sub->add_option("--nk", a.nk, "Generated keypoint count")
      ->check(CLI::Range(4, 1 << 16));
  sub->add_option("--poses", a.poses, "Pose list JSON");
  sub->add_option("--frames", a.frames, "Sampled pose count")
      ->check(CLI::Range(1, 1 << 20));
  sub->add_option("--seed", a.seed, "Random seed");
  sub->add_option("--sigma", a.sigmas, "Noise sigmas (mm), comma separated")
      ->delimiter(',');
  sub->add_option("--noise-target", a.noise_target, "surface or radial");
  sub->add_flag("--icp", a.icp, "Also report ICP-refined poses");
  sub->add_flag("--symmetric", a.symmetric, "Use ADD-S for the recall flag");
  sub->add_option("--ransac-thresh-mm", a.ransac_thresh_mm,
                  "RANSAC inlier threshold (mm)");
  sub->add_option("--ransac-iterations", a.ransac_iterations,
                  "RANSAC iteration cap");
  sub->add_option("--z-min", a.z_min, "Nearest sampled depth (m)");
  sub->add_option("--z-max", a.z_max, "Farthest sampled depth (m)");
  sub->add_option("--intrinsics", a.intrinsics, "Intrinsics JSON");
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_flag("--deterministic", a.deterministic,
                "Omit the timestamp header line");
  sub->add_option("--min-success", a.min_success,
                  "Required success rate at the lowest sigma");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Radial-map DLT pose estimation toolkit", "radialdlt"};
  app.require_subcommand(1);
  const Streams io{out, err};

  GenKeypointsArgs gk;
  auto* s_gk = app.add_subcommand("gen-keypoints",
                                  "Generate keypoints from a mesh");
  s_gk->add_option("--mesh", gk.mesh, "Object mesh")->required();
  s_gk->add_option("--d", gk.d, "Offset along the face normals (m)");
  s_gk->add_option("--nk", gk.nk, "Keypoint count (4: box keypoints)")
      ->check(CLI::Range(4, 1 << 16));
  s_gk->add_flag("--symmetric", gk.symmetric,
                 "Declare a half-turn symmetry about the box z axis");
  s_gk->add_option("--out", gk.out, "Output JSON (default stdout)");

  RenderArgs rd;
  auto* s_rd = app.add_subcommand("render", "Render oracle maps for one pose");
  s_rd->add_option("--mesh", rd.mesh, "Object mesh")->required();
  s_rd->add_option("--pose", rd.pose, "Pose JSON")->required();
  s_rd->add_option("--intrinsics", rd.intrinsics, "Intrinsics JSON");
  s_rd->add_option("--keypoints", rd.keypoints, "Keypoint JSON");
  s_rd->add_option("--sigma", rd.sigma_mm, "Radial noise sigma (mm)");
  s_rd->add_option("--seed", rd.seed, "Noise seed");
  s_rd->add_option("--out", rd.out, "Output directory")->required();

  SolveArgs sv;
  auto* s_sv = app.add_subcommand("solve", "Per-pixel DLT surface solve");
  s_sv->add_option("--radial", sv.radial, "Radial RMAP1 file")->required();
  s_sv->add_option("--depth", sv.depth, "Depth RMAP1 file")->required();
  s_sv->add_option("--keypoints", sv.keypoints, "Keypoint JSON")->required();
  s_sv->add_option("--intrinsics", sv.intrinsics, "Intrinsics JSON");
  s_sv->add_option("--radial-sigma-dm", sv.radial_sigma_dm,
                   "Assumed radial noise for the consistency check (dm)");
  s_sv->add_flag("--keep-inconsistent", sv.keep_inconsistent,
                 "Keep pixels failing the consistency check");
  s_sv->add_option("--out", sv.out, "Surface file (.csv/.bin; default stdout)");

  FitArgs ft;
  auto* s_ft = app.add_subcommand("fit", "RANSAC pose fit of a surface file");
  s_ft->add_option("--surface", ft.surface, "Surface file")->required();
  s_ft->add_option("--ransac-thresh-mm", ft.ransac_thresh_mm,
                   "Inlier threshold (mm)");
  s_ft->add_option("--ransac-iterations", ft.iterations, "Iteration cap");
  s_ft->add_option("--seed", ft.seed, "RANSAC seed");
  s_ft->add_flag("--icp", ft.icp, "Refine with ICP against --mesh");
  s_ft->add_option("--mesh", ft.mesh, "Object mesh for ICP");
  s_ft->add_option("--out", ft.out, "Pose JSON output");

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "Pose metrics for one estimate");
  s_ev->add_option("--mesh", ev.mesh, "Object mesh")->required();
  s_ev->add_option("--pose-est", ev.pose_est, "Estimated pose")->required();
  s_ev->add_option("--pose-gt", ev.pose_gt, "Ground-truth pose")->required();
  s_ev->add_option("--keypoints", ev.keypoints, "Keypoint JSON (symmetries)");
  s_ev->add_option("--intrinsics", ev.intrinsics, "Intrinsics JSON");
  s_ev->add_flag("--symmetric", ev.symmetric, "Use ADD-S for the recall flag");
  s_ev->add_flag("--require-recall", ev.require_recall,
                 "Exit 1 when the ADD(-S) recall flag is false");

  ExperimentArgs pl;
  pl.sigmas = {0.0};
  auto* s_pl = app.add_subcommand("pipeline", "End-to-end synthetic run");
  add_experiment_options(s_pl, pl);

  ExperimentArgs sw;
  sw.sigmas = {0.0, 1.0, 2.0, 4.0, 8.0};
  auto* s_sw = app.add_subcommand("sweep", "Noise sweep and ablations");
  add_experiment_options(s_sw, sw);
  s_sw->add_option("--nk-grid", sw.nk_grid,
                   "Keypoint counts for the ablation, comma separated")
      ->delimiter(',');

  SurfaceAnalysisArgs sa;
  auto* s_sa = app.add_subcommand("surface-analysis",
                                  "Percentile table of surface errors");
  s_sa->add_option("--estimate", sa.estimate, "Surface file")->required();
  s_sa->add_option("--gt", sa.gt, "Ground-truth points RMAP1")->required();
  s_sa->add_option("--percentiles", sa.percentiles, "Comma separated")
      ->delimiter(',');
  s_sa->add_option("--filter-mm", sa.filter_mm, "Error filter (mm)");
  s_sa->add_option("--out", sa.out, "CSV output (default stdout)");

  LossesArgs ls;
  auto* s_ls = app.add_subcommand("losses", "Training losses for map pairs");
  s_ls->add_option("--pred", ls.pred, "Predicted radial RMAP1")->required();
  s_ls->add_option("--gt", ls.gt, "Ground-truth radial RMAP1")->required();
  s_ls->add_option("--pred-coords", ls.pred_coords, "Predicted coord RMAP1");
  s_ls->add_option("--gt-coords", ls.gt_coords, "Ground-truth coord RMAP1");
  s_ls->add_option("--mesh", ls.mesh, "Object mesh");
  s_ls->add_option("--keypoints", ls.keypoints, "Keypoint JSON (symmetries)");
  s_ls->add_option("--bins", ls.bins, "Bins per axis")
      ->check(CLI::Range(2, 1 << 16));
  s_ls->add_option("--weights", ls.weights, "Three weights, comma separated")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s_gk->parsed()) return cmd_gen_keypoints(gk, io);
    if (s_rd->parsed()) return cmd_render(rd, io);
    if (s_sv->parsed()) return cmd_solve(sv, io);
    if (s_ft->parsed()) return cmd_fit(ft, io);
    if (s_ev->parsed()) return cmd_eval(ev, io);
    if (s_pl->parsed()) return cmd_experiment(pl, io);
    if (s_sw->parsed()) return cmd_experiment(sw, io);
    if (s_sa->parsed()) return cmd_surface_analysis(sa, io);
    if (s_ls->parsed()) return cmd_losses(ls, io);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace radialdlt::cli
