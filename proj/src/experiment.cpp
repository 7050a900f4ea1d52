#include "radialdlt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "radialdlt/bvh.hpp"
#include "radialdlt/io.hpp"
#include "radialdlt/oracle.hpp"
#include "radialdlt/parallel.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {
namespace {

constexpr double kMmPerMeter = 1000.0;
constexpr double kPi = 3.14159265358979323846;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (v.size() % 2 == 1) return v[m];
  const double hi = v[m];
  const double lo = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string csv_cell(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return out;
}

struct FrameContext {
  const TriangleMesh& mesh;
  const KeypointSet& kps;
  const ExperimentOptions& opts;
  const TriangleBvh& bvh;
  const std::vector<Vec3>& metric_pts;
};

PoseMetrics score_pose(const FrameContext& ctx, const RigidPose& est,
                       const RigidPose& gt) {
  PoseMetrics m;
  const ExperimentOptions& o = ctx.opts;
  const double diam = ctx.mesh.diameter();
  m.report.add = add_metric(ctx.metric_pts, est, gt);
  m.report.adds = adds_metric(ctx.metric_pts, est, gt);
  m.report.add_recall_10pct =
      (o.symmetric_object ? m.report.adds : m.report.add) <
      o.add_threshold_fraction * diam;
  m.report.mssd = mssd(ctx.metric_pts, est, gt, ctx.kps.symmetries);
  m.report.mspd =
      mspd(ctx.metric_pts, est, gt, ctx.kps.symmetries, o.intrinsics);
  m.report.rotation_error_deg =
      rotation_error(est, gt, ctx.kps.symmetries) * 180.0 / kPi;
  m.report.translation_error_m = translation_error(est, gt);
  double hits = 0.0;
  for (double t : o.mssd_grid) hits += m.report.mssd < t * diam ? 1.0 : 0.0;
  m.mssd_recall = o.mssd_grid.empty() ? 0.0 : hits / o.mssd_grid.size();
  hits = 0.0;
  const double px_scale = o.intrinsics.width / 640.0;
  for (double t : o.mspd_grid) {
    hits += m.report.mspd < t * px_scale ? 1.0 : 0.0;
  }
  m.mspd_recall = o.mspd_grid.empty() ? 0.0 : hits / o.mspd_grid.size();
  return m;
}

// Mean point error, minimised over the object symmetries.
double recovery_error(const SurfaceEstimate& est, const PointImage& gt,
                      const SymmetrySet& sym) {
  double best = std::numeric_limits<double>::infinity();
  for (const Mat3& s : sym.rotations()) {
    double sum = 0.0;
    for (size_t i = 0; i < est.size(); ++i) {
      const Vec3& g = gt.at(est.pixels[i].u, est.pixels[i].v);
      sum += (est.points_obj[i] - s * g).norm();
    }
    best = std::min(best, sum / static_cast<double>(est.size()));
  }
  return best;
}

void run_frame(const FrameContext& ctx, int f, const RigidPose& gt,
               FrameResult* out) {
  const ExperimentOptions& o = ctx.opts;
  const size_t ns = o.sigmas_mm.size();
  for (size_t k = 0; k < ns; ++k) {
    out[k].frame = f;
    out[k].sigma_mm = o.sigmas_mm[k];
  }
  auto fail_all = [&](const std::string& why) {
    for (size_t k = 0; k < ns; ++k) out[k].failure = why;
  };

  RenderResult r;
  std::vector<int> perm(ctx.kps.size());
  std::iota(perm.begin(), perm.end(), 0);
  try {
    r = render(ctx.mesh, gt, o.intrinsics);
    if (ctx.kps.symmetries.size() > 1 && !ctx.kps.pairs.empty()) {
      perm = order_channels(ctx.kps, gt);
    }
  } catch (const Error& e) {
    fail_all(std::string("render: ") + e.what());
    return;
  }
  const size_t mask_px = r.mask.count();
  for (size_t k = 0; k < ns; ++k) out[k].mask_pixels = mask_px;
  if (mask_px == 0) {
    fail_all("render: empty mask");
    return;
  }
  const RadialMapStack gt_stack =
      reorder_channels(radial_maps(r.points_obj, ctx.kps, r.mask), perm);
  const PointImage cam = camera_points(r.depth, o.intrinsics);
  std::vector<Vec3> scene;
  scene.reserve(mask_px);
  for (size_t i = 0; i < cam.points.size(); ++i) {
    if (cam.mask.at_index(i)) scene.push_back(cam.points[i]);
  }

  const std::uint64_t frame_seed =
      derive_seed(o.seed, static_cast<std::uint64_t>(f));
  for (size_t k = 0; k < ns; ++k) {
    FrameResult& fr = out[k];
    const double sigma_m = o.sigmas_mm[k] / kMmPerMeter;
    const double sigma_dm = sigma_m * kDecimetersPerMeter;
    try {
      DltOptions dlt = o.dlt;
      RadialMapStack stack = gt_stack;
      if (o.noise_target == NoiseTarget::kRadial) {
        stack = inject_noise(gt_stack, sigma_dm, derive_seed(frame_seed, 1));
        dlt.radial_sigma_dm = std::max(dlt.radial_sigma_dm, sigma_dm);
      }
      SurfaceSolve solved = solve_surface(stack, ctx.kps, r.depth,
                                          o.intrinsics, dlt);
      SurfaceEstimate est = std::move(solved.estimate);
      if (o.noise_target == NoiseTarget::kSurface) {
        est = inject_noise(est, sigma_m, derive_seed(frame_seed, 1));
      }
      fr.solved_pixels = est.size();
      if (est.size() == 0) {
        fr.failure = "dlt: no pixel solved";
        continue;
      }
      fr.recovery_error_m =
          recovery_error(est, r.points_obj, ctx.kps.symmetries);
      RansacConfig rc = o.ransac;
      rc.seed = derive_seed(frame_seed, 2);
      rc.inlier_threshold =
          std::max(rc.inlier_threshold, o.ransac_sigma_factor * sigma_m);
      const PoseResult fit = ransac_pose(est, rc);
      fr.inliers = fit.inlier_count;
      fr.without_icp = score_pose(ctx, fit.pose, gt);
      if (o.icp) {
        const IcpResult ref =
            icp_refine_to_surface(fit.pose, scene, ctx.bvh, o.icp_options);
        fr.with_icp = score_pose(ctx, ref.pose, gt);
      }
      fr.ok = true;
    } catch (const Error& e) {
      fr.failure = e.what();
    }
  }
}

VariantSummary summarize(const std::vector<const FrameResult*>& frames,
                         bool icp) {
  VariantSummary s;
  std::vector<double> rot, trans, add, adds, ms, mp, adds_all;
  double add_hits = 0, mssd_rec = 0, mspd_rec = 0;
  for (const FrameResult* f : frames) {
    if (!f->ok) {
      adds_all.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const PoseMetrics& m = icp ? *f->with_icp : f->without_icp;
    rot.push_back(m.report.rotation_error_deg);
    trans.push_back(m.report.translation_error_m);
    add.push_back(m.report.add);
    adds.push_back(m.report.adds);
    adds_all.push_back(m.report.adds);
    ms.push_back(m.report.mssd);
    mp.push_back(m.report.mspd);
    add_hits += m.report.add_recall_10pct ? 1.0 : 0.0;
    mssd_rec += m.mssd_recall;
    mspd_rec += m.mspd_recall;
  }
  const double n = static_cast<double>(frames.size());
  s.mean_rotation_error_deg = mean(rot);
  s.median_rotation_error_deg = median(rot);
  s.mean_translation_error_m = mean(trans);
  s.median_translation_error_m = median(trans);
  s.mean_add = mean(add);
  s.median_add = median(add);
  s.mean_adds = mean(adds);
  s.mean_mssd = mean(ms);
  s.median_mssd = median(ms);
  s.mean_mspd = mean(mp);
  if (n > 0) {
    s.add_recall = add_hits / n;
    s.mssd_recall = mssd_rec / n;
    s.mspd_recall = mspd_rec / n;
    s.auc_adds = auc(adds_all, 0.1);
  }
  return s;
}

nlohmann::json variant_json(const VariantSummary& v) {
  return {{"mean_rotation_error_deg", v.mean_rotation_error_deg},
          {"median_rotation_error_deg", v.median_rotation_error_deg},
          {"mean_translation_error_m", v.mean_translation_error_m},
          {"median_translation_error_m", v.median_translation_error_m},
          {"mean_add_m", v.mean_add},
          {"median_add_m", v.median_add},
          {"mean_adds_m", v.mean_adds},
          {"mean_mssd_m", v.mean_mssd},
          {"median_mssd_m", v.median_mssd},
          {"mean_mspd_px", v.mean_mspd},
          {"add_recall", v.add_recall},
          {"auc_adds", v.auc_adds},
          {"mssd_recall", v.mssd_recall},
          {"mspd_recall", v.mspd_recall}};
}

const char* kVariantColumns =
    "mean_rot_deg,median_rot_deg,mean_trans_m,median_trans_m,mean_add_m,"
    "median_add_m,mean_adds_m,mean_mssd_m,median_mssd_m,mean_mspd_px,"
    "add_recall,auc_adds,mssd_recall,mspd_recall";

void variant_cells(std::ostream& out, const std::optional<VariantSummary>& v) {
  if (!v) {
    out << ",,,,,,,,,,,,,";
    return;
  }
  const double cells[] = {v->mean_rotation_error_deg,
                          v->median_rotation_error_deg,
                          v->mean_translation_error_m,
                          v->median_translation_error_m,
                          v->mean_add,
                          v->median_add,
                          v->mean_adds,
                          v->mean_mssd,
                          v->median_mssd,
                          v->mean_mspd,
                          v->add_recall,
                          v->auc_adds,
                          v->mssd_recall,
                          v->mspd_recall};
  for (size_t i = 0; i < std::size(cells); ++i) {
    if (i) out << ',';
    out << format_double(cells[i]);
  }
}

void metric_cells(std::ostream& out, const std::optional<PoseMetrics>& m) {
  if (!m) {
    out << ",,,,,,,,";
    return;
  }
  const MetricReport& r = m->report;
  out << format_double(r.add) << ',' << format_double(r.adds) << ','
      << (r.add_recall_10pct ? 1 : 0) << ',' << format_double(r.mssd) << ','
      << format_double(r.mspd) << ',' << format_double(r.rotation_error_deg)
      << ',' << format_double(r.translation_error_m) << ','
      << format_double(m->mssd_recall) << ',' << format_double(m->mspd_recall);
}

}  // namespace

std::string to_string(NoiseTarget t) {
  return t == NoiseTarget::kSurface ? "surface" : "radial";
}

NoiseTarget noise_target_from_string(const std::string& s) {
  if (s == "surface") return NoiseTarget::kSurface;
  if (s == "radial") return NoiseTarget::kRadial;
  throw Error(ErrorCode::kInvalidArgument,
              "noise target must be \"surface\" or \"radial\", got \"" + s +
                  "\"");
}

std::vector<RigidPose> sample_poses(const TriangleMesh& mesh,
                                    const CameraIntrinsics& intr,
                                    const PoseSampling& s) {
  intr.validate();
  if (s.count < 0 || !(s.z_min > 0.0) || !(s.z_max >= s.z_min)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid pose sampling range");
  }
  constexpr int kMaxAttempts = 10000;
  Rng rng(s.seed);
  std::vector<RigidPose> poses;
  poses.reserve(static_cast<size_t>(s.count));
  const auto& verts = mesh.vertices();
  for (int i = 0; i < s.count; ++i) {
    bool placed = false;
    for (int a = 0; a < kMaxAttempts && !placed; ++a) {
      const Mat3 r = rng.random_rotation();
      const double z = rng.uniform(s.z_min, s.z_max);
      const double x = rng.uniform(-intr.cx, intr.width - 1 - intr.cx) * z /
                       intr.fx;
      const double y = rng.uniform(-intr.cy, intr.height - 1 - intr.cy) * z /
                       intr.fy;
      const RigidPose p(r, Vec3(x, y, z));
      placed = std::all_of(verts.begin(), verts.end(), [&](const Vec3& v) {
        const Vec3 c = p.apply(v);
        if (!(c.z() > 0.0)) return false;
        const PixelCoord px = project(intr, c);
        return px.u >= s.margin_px && px.v >= s.margin_px &&
               px.u <= intr.width - 1 - s.margin_px &&
               px.v <= intr.height - 1 - s.margin_px;
      });
      if (placed) poses.push_back(p);
    }
    if (!placed) {
      throw Error(ErrorCode::kInvalidArgument,
                  "object does not fit in the image at the sampled depths");
    }
  }
  return poses;
}

ExperimentResult run_experiment(const TriangleMesh& mesh,
                                const KeypointSet& kps,
                                const std::vector<RigidPose>& poses,
                                const ExperimentOptions& opts) {
  kps.validate();
  opts.intrinsics.validate();
  opts.ransac.validate();
  if (opts.sigmas_mm.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sigma list is empty");
  }
  for (double s : opts.sigmas_mm) {
    if (!(s >= 0.0)) {
      throw Error(ErrorCode::kNegativeSigma, "sigma list has negative values");
    }
  }
  // Fails fast on coplanar keypoints instead of once per frame.
  DltSolver probe(kps, opts.dlt);
  (void)probe;

  const TriangleBvh bvh(mesh);
  const MetricPoints mp = metric_points(mesh);
  const FrameContext ctx{mesh, kps, opts, bvh, mp.points};
  const size_t ns = opts.sigmas_mm.size();

  ExperimentResult res;
  res.metric_stride = mp.stride;
  res.frames.resize(poses.size() * ns);
  parallel_for(poses.size(), [&](size_t f) {
    run_frame(ctx, static_cast<int>(f), poses[f], &res.frames[f * ns]);
  });

  for (size_t k = 0; k < ns; ++k) {
    SigmaSummary s;
    s.sigma_mm = opts.sigmas_mm[k];
    std::vector<const FrameResult*> rows;
    std::vector<double> rec;
    for (size_t f = 0; f < poses.size(); ++f) {
      const FrameResult& fr = res.frames[f * ns + k];
      rows.push_back(&fr);
      if (fr.ok) rec.push_back(fr.recovery_error_m);
    }
    s.frames = static_cast<int>(rows.size());
    s.succeeded = static_cast<int>(rec.size());
    s.mean_recovery_error_m = mean(rec);
    s.without_icp = summarize(rows, false);
    if (opts.icp) s.with_icp = summarize(rows, true);
    res.summaries.push_back(s);
  }
  return res;
}

std::vector<AblationRow> run_keypoint_ablation(
    const TriangleMesh& mesh, const std::vector<RigidPose>& poses,
    const std::vector<int>& nk_grid, const ExperimentOptions& opts) {
  ExperimentOptions o = opts;
  o.sigmas_mm = {opts.sigmas_mm.empty() ? 0.0 : opts.sigmas_mm.front()};
  std::vector<AblationRow> rows;
  for (int nk : nk_grid) {
    const KeypointSet kps = farthest_point_keypoints(mesh, nk);
    const ExperimentResult r = run_experiment(mesh, kps, poses, o);
    rows.push_back({nk, r.summaries.front()});
  }
  return rows;
}

std::string frames_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "frame,sigma_mm,ok,failure,mask_pixels,solved_pixels,"
         "recovery_error_m,inliers,"
         "add_m,adds_m,add_recall,mssd_m,mspd_px,rot_err_deg,trans_err_m,"
         "mssd_recall,mspd_recall,"
         "icp_add_m,icp_adds_m,icp_add_recall,icp_mssd_m,icp_mspd_px,"
         "icp_rot_err_deg,icp_trans_err_m,icp_mssd_recall,icp_mspd_recall\n";
  for (const FrameResult& f : r.frames) {
    out << f.frame << ',' << format_double(f.sigma_mm) << ','
        << (f.ok ? 1 : 0) << ',' << csv_cell(f.failure) << ','
        << f.mask_pixels << ',' << f.solved_pixels << ','
        << format_double(f.recovery_error_m) << ',' << f.inliers << ',';
    metric_cells(out, f.ok ? std::optional<PoseMetrics>(f.without_icp)
                           : std::nullopt);
    out << ',';
    metric_cells(out, f.ok ? f.with_icp : std::nullopt);
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "sigma_mm,frames,succeeded,mean_recovery_error_m";
  for (const char* prefix : {"", "icp_"}) {
    std::istringstream ss(kVariantColumns);
    std::string c;
    while (std::getline(ss, c, ',')) out << ',' << prefix << c;
  }
  out << '\n';
  for (const SigmaSummary& s : r.summaries) {
    out << format_double(s.sigma_mm) << ',' << s.frames << ',' << s.succeeded
        << ',' << format_double(s.mean_recovery_error_m) << ',';
    variant_cells(out, s.without_icp);
    out << ',';
    variant_cells(out, s.with_icp);
    out << '\n';
  }
  return out.str();
}

std::string summary_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["metric_vertex_stride"] = r.metric_stride;
  j["sigmas"] = nlohmann::json::array();
  for (const SigmaSummary& s : r.summaries) {
    nlohmann::json e{{"sigma_mm", s.sigma_mm},
                     {"frames", s.frames},
                     {"succeeded", s.succeeded},
                     {"mean_recovery_error_m", s.mean_recovery_error_m},
                     {"without_icp", variant_json(s.without_icp)}};
    e["with_icp"] = s.with_icp ? variant_json(*s.with_icp) : nlohmann::json();
    j["sigmas"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "n_k,sigma_mm,frames,succeeded,mean_recovery_error_m,"
      << kVariantColumns << '\n';
  for (const AblationRow& a : rows) {
    out << a.n_k << ',' << format_double(a.summary.sigma_mm) << ','
        << a.summary.frames << ',' << a.summary.succeeded << ','
        << format_double(a.summary.mean_recovery_error_m) << ',';
    variant_cells(out, a.summary.without_icp);
    out << '\n';
  }
  return out.str();
}

double baseline_success_rate(const ExperimentResult& r) {
  if (r.summaries.empty()) return 0.0;
  const auto it = std::min_element(
      r.summaries.begin(), r.summaries.end(),
      [](const SigmaSummary& a, const SigmaSummary& b) {
        return a.sigma_mm < b.sigma_mm;
      });
  return it->frames ? static_cast<double>(it->succeeded) / it->frames : 0.0;
}

}  // namespace radialdlt
