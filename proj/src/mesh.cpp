#include "radialdlt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "radialdlt/hull.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {
namespace {

[[noreturn]] void format_error(size_t line_no, const std::string& line,
                               const std::string& what) {
  std::ostringstream os;
  os << "line " << line_no << ": " << what << ": '" << line << "'";
  throw Error(ErrorCode::kFormatError, os.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses exactly `count` whitespace-separated tokens into `out`; returns false
// on malformed or surplus tokens.
template <typename T>
bool parse_exact(std::istringstream& is, T* out, int count) {
  for (int i = 0; i < count; ++i) {
    if (!(is >> out[i])) return false;
  }
  std::string extra;
  return !(is >> extra);
}

}  // namespace

double brute_force_diameter(const std::vector<Vec3>& points) {
  double best = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, (points[i] - points[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices,
                           std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const size_t n = vertices_.size();
  for (size_t t = 0; t < triangles_.size(); ++t) {
    for (auto idx : triangles_[t]) {
      if (idx >= n) {
        throw Error(ErrorCode::kFormatError,
                    "triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(idx) + " of " + std::to_string(n));
      }
    }
  }
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) {
      throw Error(ErrorCode::kFormatError, "non-finite vertex coordinate");
    }
  }
  if (!vertices_.empty()) {
    aabb_min_ = aabb_max_ = vertices_.front();
    for (const Vec3& v : vertices_) {
      aabb_min_ = aabb_min_.cwiseMin(v);
      aabb_max_ = aabb_max_.cwiseMax(v);
    }
  }

  if (n <= kExactDiameterLimit) {
    diameter_ = brute_force_diameter(vertices_);
    return;
  }
  // The farthest pair is always a pair of hull vertices.
  std::vector<Vec3> candidates;
  try {
    const ConvexHull hull = convex_hull_3d(vertices_);
    for (int i : hull.vertex_indices) candidates.push_back(vertices_[i]);
  } catch (const Error&) {
    candidates = vertices_;
  }
  if (candidates.size() > kExactDiameterLimit) {
    const size_t stride = (candidates.size() + kExactDiameterLimit - 1) /
                          kExactDiameterLimit;
    std::vector<Vec3> sampled;
    for (size_t i = 0; i < candidates.size(); i += stride) {
      sampled.push_back(candidates[i]);
    }
    candidates.swap(sampled);
  }
  diameter_ = brute_force_diameter(candidates);
}

double TriangleMesh::bounding_radius() const {
  double r = 0.0;
  for (const Vec3& v : vertices_) r = std::max(r, v.norm());
  return r;
}

TriangleMesh parse_obj(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::pair<size_t, std::string>> face_lines;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (tag == "v") {
      double xyz[3];
      if (!parse_exact(is, xyz, 3)) {
        format_error(line_no, line, "expected 'v x y z'");
      }
      vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
    } else if (tag == "f") {
      long idx[3];
      if (!parse_exact(is, idx, 3)) {
        format_error(line_no, line,
                     "expected a triangular face 'f a b c' with plain indices");
      }
      Triangle t;
      for (int k = 0; k < 3; ++k) {
        if (idx[k] < 1) format_error(line_no, line, "indices are 1-based");
        t[k] = static_cast<std::uint32_t>(idx[k] - 1);
      }
      triangles.push_back(t);
      face_lines.emplace_back(line_no, line);
    } else {
      format_error(line_no, line, "unsupported OBJ statement '" + tag + "'");
    }
  }
  for (size_t i = 0; i < triangles.size(); ++i) {
    for (auto idx : triangles[i]) {
      if (idx >= vertices.size()) {
        format_error(face_lines[i].first, face_lines[i].second,
                     "vertex index out of range");
      }
    }
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh parse_ply(std::istream& in) {
  std::string raw;
  size_t line_no = 0;
  const auto next_line = [&](std::string& out) {
    if (!std::getline(in, raw)) return false;
    ++line_no;
    out = trim(raw);
    return true;
  };

  std::string line;
  if (!next_line(line) || line != "ply") {
    format_error(line_no, line, "missing 'ply' magic");
  }
  if (!next_line(line) || line != "format ascii 1.0") {
    format_error(line_no, line, "only 'format ascii 1.0' is supported");
  }

  enum class Section { kNone, kVertex, kFace };
  Section section = Section::kNone;
  size_t n_vertices = 0, n_faces = 0;
  bool seen_vertex = false, seen_face = false;
  std::vector<std::string> vertex_props;
  bool face_list_ok = false;
  for (;;) {
    if (!next_line(line)) format_error(line_no, line, "unterminated header");
    if (line.empty() || line.rfind("comment", 0) == 0 ||
        line.rfind("obj_info", 0) == 0) {
      continue;
    }
    if (line == "end_header") break;
    std::istringstream is(line);
    std::string kw;
    is >> kw;
    if (kw == "element") {
      std::string name;
      long count = -1;
      if (!(is >> name >> count) || count < 0) {
        format_error(line_no, line, "malformed element declaration");
      }
      if (name == "vertex" && !seen_vertex && !seen_face) {
        section = Section::kVertex;
        n_vertices = static_cast<size_t>(count);
        seen_vertex = true;
      } else if (name == "face" && seen_vertex && !seen_face) {
        section = Section::kFace;
        n_faces = static_cast<size_t>(count);
        seen_face = true;
      } else {
        format_error(line_no, line, "unsupported element '" + name + "'");
      }
    } else if (kw == "property") {
      std::string type;
      is >> type;
      if (section == Section::kVertex) {
        std::string name;
        if (type == "list" || !(is >> name)) {
          format_error(line_no, line, "vertex properties must be scalars");
        }
        if ((name == "x" || name == "y" || name == "z") && type != "float" &&
            type != "double" && type != "float32" && type != "float64") {
          format_error(line_no, line, "coordinates must be float or double");
        }
        vertex_props.push_back(name);
      } else if (section == Section::kFace) {
        std::string count_t, index_t, name;
        if (type != "list" || !(is >> count_t >> index_t >> name) ||
            face_list_ok) {
          format_error(line_no, line, "face element needs one index list");
        }
        face_list_ok = true;
      } else {
        format_error(line_no, line, "property outside an element");
      }
    } else {
      format_error(line_no, line, "unsupported header line");
    }
  }
  const auto find_prop = [&](const char* name) -> long {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    return it == vertex_props.end() ? -1 : it - vertex_props.begin();
  };
  const long ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  if (!seen_vertex || ix < 0 || iy < 0 || iz < 0) {
    format_error(line_no, line, "vertex element with x, y, z is required");
  }
  if (seen_face && !face_list_ok) {
    format_error(line_no, line, "face element without an index list");
  }

  std::vector<Vec3> vertices;
  vertices.reserve(n_vertices);
  std::vector<double> values(vertex_props.size());
  for (size_t i = 0; i < n_vertices; ++i) {
    if (!next_line(line)) format_error(line_no, line, "missing vertex rows");
    std::istringstream is(line);
    if (!parse_exact(is, values.data(), static_cast<int>(values.size()))) {
      format_error(line_no, line, "malformed vertex row");
    }
    vertices.emplace_back(values[ix], values[iy], values[iz]);
  }
  std::vector<Triangle> triangles;
  triangles.reserve(n_faces);
  for (size_t i = 0; i < n_faces; ++i) {
    if (!next_line(line)) format_error(line_no, line, "missing face rows");
    std::istringstream is(line);
    long row[4];
    if (!parse_exact(is, row, 4) || row[0] != 3) {
      format_error(line_no, line, "faces must be '3 a b c'");
    }
    Triangle t;
    for (int k = 0; k < 3; ++k) {
      if (row[k + 1] < 0 || static_cast<size_t>(row[k + 1]) >= n_vertices) {
        format_error(line_no, line, "vertex index out of range");
      }
      t[k] = static_cast<std::uint32_t>(row[k + 1]);
    }
    triangles.push_back(t);
  }
  while (next_line(line)) {
    if (!line.empty()) format_error(line_no, line, "trailing data");
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open mesh '" + path.string() + "'");
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  try {
    if (ext == ".obj") return parse_obj(in);
    if (ext == ".ply") return parse_ply(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  throw Error(ErrorCode::kFormatError,
              "unsupported mesh extension '" + ext + "' (expected .obj/.ply)");
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const Triangle& t : mesh.triangles()) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  write_obj(out, mesh);
}

TriangleMesh make_box_mesh(const Vec3& extents, int segments) {
  if (segments < 1 || (extents.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "box needs positive extents");
  }
  const int s = segments;
  std::map<std::tuple<int, int, int>, std::uint32_t> index;
  std::vector<Vec3> vertices;
  const auto vertex = [&](int i, int j, int k) {
    const auto key = std::make_tuple(i, j, k);
    const auto it = index.find(key);
    if (it != index.end()) return it->second;
    const Vec3 p((double(i) / s - 0.5) * extents.x(),
                 (double(j) / s - 0.5) * extents.y(),
                 (double(k) / s - 0.5) * extents.z());
    vertices.push_back(p);
    const auto id = static_cast<std::uint32_t>(vertices.size() - 1);
    index.emplace(key, id);
    return id;
  };

  std::vector<Triangle> triangles;
  // For each axis and side, (a, b) parametrize the face so that a x b points
  // outward.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int a_axis = (axis + 1) % 3;
      const int b_axis = (axis + 2) % 3;
      for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) {
          const auto grid = [&](int da, int db) {
            int c[3];
            c[axis] = side * s;
            c[a_axis] = a + da;
            c[b_axis] = b + db;
            return vertex(c[0], c[1], c[2]);
          };
          const auto v00 = grid(0, 0), v10 = grid(1, 0), v11 = grid(1, 1),
                     v01 = grid(0, 1);
          if (side == 1) {
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
          } else {
            triangles.push_back({v00, v11, v10});
            triangles.push_back({v00, v01, v11});
          }
        }
      }
    }
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

namespace {

// Sphere-topology mesh whose vertex (ring, sector) sits at
// radius_fn(direction) * direction. Pole 0 is at -z.
template <typename RadiusFn>
TriangleMesh make_star_mesh(int rings, int sectors, RadiusFn radius_fn) {
  if (rings < 2 || sectors < 3) {
    throw Error(ErrorCode::kInvalidArgument, "need rings >= 2, sectors >= 3");
  }
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  const auto at = [&](const Vec3& d) { return Vec3(radius_fn(d) * d); };
  vertices.push_back(at(Vec3(0, 0, -1)));
  for (int r = 1; r < rings; ++r) {
    const double theta = M_PI * r / rings;  // from -z
    for (int s = 0; s < sectors; ++s) {
      const double phi = 2.0 * M_PI * s / sectors;
      const Vec3 d(std::sin(theta) * std::cos(phi),
                   std::sin(theta) * std::sin(phi), -std::cos(theta));
      vertices.push_back(at(d));
    }
  }
  vertices.push_back(at(Vec3(0, 0, 1)));
  const auto ring_vertex = [&](int r, int s) {
    return static_cast<std::uint32_t>(1 + (r - 1) * sectors + (s % sectors));
  };
  const auto top = static_cast<std::uint32_t>(vertices.size() - 1);
  for (int s = 0; s < sectors; ++s) {
    triangles.push_back({0, ring_vertex(1, s + 1), ring_vertex(1, s)});
  }
  for (int r = 1; r + 1 < rings; ++r) {
    for (int s = 0; s < sectors; ++s) {
      const auto a = ring_vertex(r, s), b = ring_vertex(r, s + 1),
                 c = ring_vertex(r + 1, s + 1), d = ring_vertex(r + 1, s);
      triangles.push_back({a, b, c});
      triangles.push_back({a, c, d});
    }
  }
  for (int s = 0; s < sectors; ++s) {
    triangles.push_back(
        {top, ring_vertex(rings - 1, s), ring_vertex(rings - 1, s + 1)});
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

}  // namespace

TriangleMesh make_uv_sphere(double radius, int rings, int sectors) {
  return make_star_mesh(rings, sectors, [radius](const Vec3&) { return radius; });
}

TriangleMesh make_tetrahedron(double edge) {
  const double a = edge / (2.0 * std::sqrt(2.0));
  std::vector<Vec3> v{{a, a, a}, {a, -a, -a}, {-a, a, -a}, {-a, -a, a}};
  std::vector<Triangle> t{{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh make_blob_mesh(double radius, int rings, int sectors,
                            std::uint64_t seed) {
  // A handful of random low-frequency bumps; amplitudes stay well below 1 so
  // the radius function is positive and the surface stays star-shaped.
  Rng rng(seed);
  struct Bump {
    Vec3 dir;
    double amp;
    double sharpness;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < 6; ++i) {
    bumps.push_back({rng.unit_vector(), rng.uniform(0.08, 0.25),
                     rng.uniform(1.5, 4.0)});
  }
  const Vec3 stretch(rng.uniform(1.0, 1.4), rng.uniform(0.7, 1.0),
                     rng.uniform(0.8, 1.1));
  return make_star_mesh(rings, sectors, [&](const Vec3& d) {
    double r = 1.0;
    for (const Bump& b : bumps) {
      r += b.amp * std::exp(b.sharpness * (d.dot(b.dir) - 1.0));
    }
    const double ellipsoid =
        1.0 / std::sqrt((d.cwiseQuotient(stretch)).squaredNorm());
    return radius * r * ellipsoid;
  });
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, size_t count,
                                 std::uint64_t seed) {
  const auto& v = mesh.vertices();
  const auto& tris = mesh.triangles();
  if (tris.empty()) {
    throw Error(ErrorCode::kDegenerateMesh, "mesh has no triangles");
  }
  std::vector<double> cdf(tris.size());
  double total = 0.0;
  for (size_t i = 0; i < tris.size(); ++i) {
    const auto& t = tris[i];
    total += 0.5 * (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]).norm();
    cdf[i] = total;
  }
  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    const double pick = rng.uniform() * total;
    const size_t i = std::min<size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin(),
        tris.size() - 1);
    double a = rng.uniform(), b = rng.uniform();
    if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
    const auto& t = tris[i];
    out.push_back(v[t[0]] + a * (v[t[1]] - v[t[0]]) + b * (v[t[2]] - v[t[0]]));
  }
  return out;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidPose& pose) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertices().size());
  for (const Vec3& p : mesh.vertices()) vertices.push_back(pose.apply(p));
  return TriangleMesh(std::move(vertices), mesh.triangles());
}

}  // namespace radialdlt
