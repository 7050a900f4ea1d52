#include "radialdlt/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

namespace radialdlt {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

constexpr char kRmapMagic[] = "RMAP1\n";
constexpr char kSurfMagic[] = "SURF1\n";
constexpr size_t kMagicLen = 6;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorCode::kFormatError,
                std::string("truncated input while reading ") + what);
  }
  return v;
}

void expect_magic(std::istream& in, const char* magic, const char* format) {
  char buf[kMagicLen];
  if (!in.read(buf, kMagicLen) || std::memcmp(buf, magic, kMagicLen) != 0) {
    throw Error(ErrorCode::kFormatError,
                std::string("not a ") + format + " stream (bad magic)");
  }
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return f;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary | std::ios::trunc
                               : std::ios::out | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  return f;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError,
                std::string("invalid ") + what + " JSON: " + e.what());
  }
}

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kFormatError,
                std::string(what) + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Mat3 mat3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kFormatError,
                std::string(what) + " must be a 3x3 nested array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3_from(j[r], what).transpose();
  return m;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(to_json(Vec3(m.row(r))));
  return rows;
}

json pose_json(const RigidPose& p) {
  return json{{"rotation", to_json(p.rotation())},
              {"translation_m", to_json(p.translation())}};
}

RigidPose pose_from(const json& j) {
  if (!j.is_object() || !j.contains("rotation") ||
      !j.contains("translation_m")) {
    throw Error(ErrorCode::kFormatError,
                "pose JSON needs \"rotation\" and \"translation_m\"");
  }
  return RigidPose::from_approximate(mat3_from(j["rotation"], "rotation"),
                                     vec3_from(j["translation_m"],
                                               "translation_m"));
}

// Wraps nlohmann type errors (e.g. a string where a number is expected).
template <typename F>
auto with_format_errors(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError,
                std::string("invalid ") + what + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f = open_in(path, false);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream f = open_out(path, false);
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

// RMAP1.

void write_rmap(std::ostream& out, const ChannelMap& map) {
  const size_t n = static_cast<size_t>(map.width) * map.height;
  if (map.values.size() != n * map.channels || map.mask.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "channel map buffers do not match its size");
  }
  out.write(kRmapMagic, kMagicLen);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(map.width));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(map.height));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(map.channels));
  for (double v : map.values) put<float>(out, static_cast<float>(v));
  for (size_t i = 0; i < n; ++i) {
    put<std::uint8_t>(out, map.mask.at_index(i) ? 1 : 0);
  }
}

ChannelMap read_rmap(std::istream& in) {
  expect_magic(in, kRmapMagic, "RMAP1");
  ChannelMap m;
  const auto w = get<std::uint32_t>(in, "width");
  const auto h = get<std::uint32_t>(in, "height");
  const auto c = get<std::uint32_t>(in, "channels");
  constexpr std::uint32_t kMaxSide = 1u << 15;
  if (w > kMaxSide || h > kMaxSide || c > 4096) {
    throw Error(ErrorCode::kFormatError, "RMAP1 dimensions out of range");
  }
  m.width = static_cast<int>(w);
  m.height = static_cast<int>(h);
  m.channels = static_cast<int>(c);
  const size_t n = static_cast<size_t>(w) * h;
  m.values.resize(n * c);
  for (double& v : m.values) v = get<float>(in, "values");
  m.mask = SegMask(m.width, m.height);
  for (size_t i = 0; i < n; ++i) {
    const auto b = get<std::uint8_t>(in, "mask");
    if (b > 1) throw Error(ErrorCode::kFormatError, "RMAP1 mask byte not 0/1");
    m.mask.set_index(i, b == 1);
  }
  return m;
}

void save_rmap(const std::filesystem::path& path, const ChannelMap& map) {
  std::ofstream f = open_out(path, true);
  write_rmap(f, map);
  if (!f) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

ChannelMap load_rmap(const std::filesystem::path& path) {
  std::ifstream f = open_in(path, true);
  return read_rmap(f);
}

ChannelMap depth_to_map(const DepthImage& depth) {
  ChannelMap m;
  m.width = depth.width;
  m.height = depth.height;
  m.channels = 1;
  m.values = depth.depth;
  m.mask = depth.mask();
  return m;
}

DepthImage map_to_depth(const ChannelMap& map) {
  if (map.channels != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "depth map needs one channel");
  }
  DepthImage d;
  d.width = map.width;
  d.height = map.height;
  d.depth = map.values;
  return d;
}

ChannelMap points_to_map(const PointImage& pts) {
  ChannelMap m;
  m.width = pts.width;
  m.height = pts.height;
  m.channels = 3;
  m.mask = pts.mask;
  m.values.resize(pts.points.size() * 3);
  for (size_t i = 0; i < pts.points.size(); ++i) {
    for (int k = 0; k < 3; ++k) m.values[i * 3 + k] = pts.points[i][k];
  }
  return m;
}

PointImage map_to_points(const ChannelMap& map) {
  if (map.channels != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "point map needs 3 channels");
  }
  PointImage p;
  p.width = map.width;
  p.height = map.height;
  p.mask = map.mask;
  const size_t n = static_cast<size_t>(map.width) * map.height;
  p.points.resize(n);
  for (size_t i = 0; i < n; ++i) {
    p.points[i] = Vec3(map.values[i * 3], map.values[i * 3 + 1],
                       map.values[i * 3 + 2]);
  }
  return p;
}

// Keypoints.

std::string keypoints_to_json(const KeypointSet& kps) {
  json j;
  j["points"] = json::array();
  for (const Vec3& p : kps.points) j["points"].push_back(to_json(p));
  j["pairs"] = json::array();
  for (const KeypointPair& pr : kps.pairs) {
    j["pairs"].push_back(json::array({pr[0], pr[1]}));
  }
  j["units"] = "m";
  j["offset_d"] = kps.offset_d ? json(*kps.offset_d) : json(nullptr);
  j["symmetries"] = json::array();
  for (size_t i = 1; i < kps.symmetries.size(); ++i) {
    j["symmetries"].push_back(to_json(kps.symmetries.rotations()[i]));
  }
  return j.dump(2) + "\n";
}

KeypointSet keypoints_from_json(const std::string& text) {
  const json j = parse_json(text, "keypoint");
  return with_format_errors("keypoint JSON", [&] {
    if (!j.is_object() || !j.contains("points")) {
      throw Error(ErrorCode::kFormatError, "keypoint JSON needs \"points\"");
    }
    if (j.contains("units") && j["units"].get<std::string>() != "m") {
      throw Error(ErrorCode::kFormatError, "keypoint units must be \"m\"");
    }
    KeypointSet k;
    for (const json& p : j["points"]) k.points.push_back(vec3_from(p, "point"));
    if (j.contains("pairs")) {
      for (const json& p : j["pairs"]) {
        if (!p.is_array() || p.size() != 2) {
          throw Error(ErrorCode::kFormatError, "pair must have 2 indices");
        }
        k.pairs.push_back({p[0].get<int>(), p[1].get<int>()});
      }
    }
    if (j.contains("offset_d") && !j["offset_d"].is_null()) {
      k.offset_d = j["offset_d"].get<double>();
    }
    if (j.contains("symmetries")) {
      std::vector<Mat3> rots;
      for (const json& r : j["symmetries"]) {
        rots.push_back(mat3_from(r, "symmetry"));
      }
      k.symmetries = SymmetrySet(rots);
    }
    k.validate();
    return k;
  });
}

void save_keypoints(const std::filesystem::path& path,
                    const KeypointSet& kps) {
  write_text_file(path, keypoints_to_json(kps));
}

KeypointSet load_keypoints(const std::filesystem::path& path) {
  return keypoints_from_json(read_text_file(path));
}

// Poses.

std::string pose_to_json(const RigidPose& pose) {
  return pose_json(pose).dump(2) + "\n";
}

RigidPose pose_from_json(const std::string& text) {
  const json j = parse_json(text, "pose");
  return with_format_errors("pose JSON", [&] { return pose_from(j); });
}

void save_pose(const std::filesystem::path& path, const RigidPose& pose) {
  write_text_file(path, pose_to_json(pose));
}

RigidPose load_pose(const std::filesystem::path& path) {
  return pose_from_json(read_text_file(path));
}

void save_poses(const std::filesystem::path& path,
                const std::vector<RigidPose>& poses) {
  json arr = json::array();
  for (const RigidPose& p : poses) arr.push_back(pose_json(p));
  write_text_file(path, arr.dump(2) + "\n");
}

std::vector<RigidPose> load_poses(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), "pose list");
  return with_format_errors("pose list", [&] {
    std::vector<RigidPose> out;
    if (j.is_array()) {
      for (const json& p : j) out.push_back(pose_from(p));
    } else {
      out.push_back(pose_from(j));
    }
    return out;
  });
}

// Intrinsics.

std::string intrinsics_to_json(const CameraIntrinsics& intr) {
  const json j{{"fx", intr.fx},         {"fy", intr.fy},
               {"cx", intr.cx},         {"cy", intr.cy},
               {"width", intr.width},   {"height", intr.height}};
  return j.dump(2) + "\n";
}

CameraIntrinsics intrinsics_from_json(const std::string& text) {
  const json j = parse_json(text, "intrinsics");
  return with_format_errors("intrinsics JSON", [&] {
    CameraIntrinsics c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.validate();
    return c;
  });
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  return intrinsics_from_json(read_text_file(path));
}

// Surface estimates.

constexpr std::string_view kSurfaceCsvHeader =
    "u,v,x_obj,y_obj,z_obj,x_cam,y_cam,z_cam,residual";

void write_surface_csv(std::ostream& out, const SurfaceEstimate& est) {
  est.validate();
  out << kSurfaceCsvHeader << '\n';
  for (size_t i = 0; i < est.size(); ++i) {
    out << est.pixels[i].u << ',' << est.pixels[i].v;
    for (int k = 0; k < 3; ++k) out << ',' << format_double(est.points_obj[i][k]);
    for (int k = 0; k < 3; ++k) out << ',' << format_double(est.points_cam[i][k]);
    out << ',' << format_double(est.residuals[i]) << '\n';
  }
}

SurfaceEstimate read_surface_csv(std::istream& in) {
  SurfaceEstimate est;
  std::string line;
  if (!std::getline(in, line) ||
      (!line.empty() && line.back() == '\r' ? line.substr(0, line.size() - 1)
                                             : line) != kSurfaceCsvHeader) {
    throw Error(ErrorCode::kFormatError, "surface CSV header missing");
  }
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> f;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      double x;
      const auto r = std::from_chars(p, end, x);
      if (r.ec != std::errc()) {
        throw Error(ErrorCode::kFormatError,
                    "surface CSV line " + std::to_string(line_no) +
                        ": bad number");
      }
      f.push_back(x);
      p = r.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw Error(ErrorCode::kFormatError,
                    "surface CSV line " + std::to_string(line_no) +
                        ": expected ','");
      }
      ++p;
    }
    if (f.size() != 9) {
      throw Error(ErrorCode::kFormatError,
                  "surface CSV line " + std::to_string(line_no) +
                      ": expected 9 fields");
    }
    est.pixels.push_back({static_cast<int>(f[0]), static_cast<int>(f[1])});
    est.points_obj.emplace_back(f[2], f[3], f[4]);
    est.points_cam.emplace_back(f[5], f[6], f[7]);
    est.residuals.push_back(f[8]);
  }
  est.validate();
  return est;
}

void write_surface_bin(std::ostream& out, const SurfaceEstimate& est) {
  est.validate();
  const json header{{"count", est.size()},
                    {"units", "m"},
                    {"fields", {"u", "v", "x_obj", "y_obj", "z_obj", "x_cam",
                                "y_cam", "z_cam", "residual"}}};
  const std::string h = header.dump();
  out.write(kSurfMagic, kMagicLen);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (size_t i = 0; i < est.size(); ++i) {
    put<std::int32_t>(out, est.pixels[i].u);
    put<std::int32_t>(out, est.pixels[i].v);
    for (int k = 0; k < 3; ++k) put<double>(out, est.points_obj[i][k]);
    for (int k = 0; k < 3; ++k) put<double>(out, est.points_cam[i][k]);
    put<double>(out, est.residuals[i]);
  }
}

SurfaceEstimate read_surface_bin(std::istream& in) {
  expect_magic(in, kSurfMagic, "SURF1");
  const auto len = get<std::uint32_t>(in, "header length");
  if (len > (1u << 20)) {
    throw Error(ErrorCode::kFormatError, "SURF1 header too long");
  }
  std::string h(len, '\0');
  if (!in.read(h.data(), len)) {
    throw Error(ErrorCode::kFormatError, "truncated SURF1 header");
  }
  const json header = parse_json(h, "SURF1 header");
  const size_t count = with_format_errors(
      "SURF1 header", [&] { return header.at("count").get<size_t>(); });
  SurfaceEstimate est;
  for (size_t i = 0; i < count; ++i) {
    const int u = get<std::int32_t>(in, "u");
    const int v = get<std::int32_t>(in, "v");
    est.pixels.push_back({u, v});
    Vec3 a, b;
    for (int k = 0; k < 3; ++k) a[k] = get<double>(in, "x_obj");
    for (int k = 0; k < 3; ++k) b[k] = get<double>(in, "x_cam");
    est.points_obj.push_back(a);
    est.points_cam.push_back(b);
    est.residuals.push_back(get<double>(in, "residual"));
  }
  est.validate();
  return est;
}

void save_surface(const std::filesystem::path& path,
                  const SurfaceEstimate& est) {
  const auto ext = path.extension();
  if (ext == ".csv") {
    std::ofstream f = open_out(path, false);
    write_surface_csv(f, est);
  } else if (ext == ".bin") {
    std::ofstream f = open_out(path, true);
    write_surface_bin(f, est);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "surface files must end in .csv or .bin: " + path.string());
  }
}

SurfaceEstimate load_surface(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".csv") {
    std::ifstream f = open_in(path, false);
    return read_surface_csv(f);
  }
  if (ext == ".bin") {
    std::ifstream f = open_in(path, true);
    return read_surface_bin(f);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "surface files must end in .csv or .bin: " + path.string());
}

}  // namespace radialdlt
