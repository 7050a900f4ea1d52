#include "radialdlt/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace radialdlt {
namespace {

struct HullFace {
  std::array<int, 3> v;
  Vec3 normal;
  double offset;
  bool alive;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

HullFace make_face(std::span<const Vec3> pts, int a, int b, int c) {
  HullFace f{{a, b, c}, Vec3::Zero(), 0.0, true};
  const Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double len = n.norm();
  f.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  f.offset = f.normal.dot(pts[a]);
  return f;
}

}  // namespace

Vec3 ConvexHull::face_normal(std::span<const Vec3> points, size_t f) const {
  const auto& t = faces[f];
  return (points[t[1]] - points[t[0]])
      .cross(points[t[2]] - points[t[0]])
      .normalized();
}

ConvexHull convex_hull_3d(std::span<const Vec3> pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 4) {
    throw Error(ErrorCode::kDegenerateMesh, "convex hull needs >= 4 points");
  }
  Vec3 lo = pts[0], hi = pts[0];
  for (const Vec3& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).norm();
  const double eps = 1e-9 * std::max(scale, 1e-300);

  // Initial tetrahedron from strictly extreme points: ties in each measure go
  // to the point farthest from the first seed, which is always a hull vertex.
  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[i0];
    if (std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z())) i0 = i;
  }
  const auto pick = [&](auto&& measure) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) best = std::max(best, measure(i));
    int chosen = i0;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = (pts[i] - pts[i0]).squaredNorm();
      if (measure(i) >= best - eps && d > far) far = d, chosen = i;
    }
    return std::pair{chosen, best};
  };
  const auto [i1_, d1] =
      pick([&](int i) { return (pts[i] - pts[i0]).norm(); });
  int i1 = i1_;
  if (d1 <= eps) {
    throw Error(ErrorCode::kDegenerateMesh, "all points coincide");
  }
  const Vec3 dir01 = (pts[i1] - pts[i0]).normalized();
  const auto [i2_, d2] =
      pick([&](int i) { return (pts[i] - pts[i0]).cross(dir01).norm(); });
  int i2 = i2_;
  if (d2 <= eps) {
    throw Error(ErrorCode::kDegenerateMesh, "all points are collinear");
  }
  const Vec3 plane_n =
      (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  const auto [i3, d3] =
      pick([&](int i) { return std::abs(plane_n.dot(pts[i] - pts[i0])); });
  if (d3 <= eps) {
    throw Error(ErrorCode::kDegenerateMesh, "all points are coplanar");
  }

  std::vector<HullFace> faces;
  std::unordered_map<std::uint64_t, int> edge_owner;  // directed edge -> face
  const auto add_face = [&](int a, int b, int c) {
    faces.push_back(make_face(pts, a, b, c));
    const int id = static_cast<int>(faces.size()) - 1;
    edge_owner[edge_key(a, b)] = id;
    edge_owner[edge_key(b, c)] = id;
    edge_owner[edge_key(c, a)] = id;
  };
  if (plane_n.dot(pts[i3] - pts[i0]) > 0.0) std::swap(i1, i2);
  add_face(i0, i1, i2);
  add_face(i0, i3, i1);
  add_face(i1, i3, i2);
  add_face(i2, i3, i0);

  // Farthest points first keeps the intermediate hulls close to the final one.
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid /= static_cast<double>(n);
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i != i0 && i != i1 && i != i2 && i != i3) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return (pts[a] - centroid).squaredNorm() > (pts[b] - centroid).squaredNorm();
  });

  std::vector<int> visible;
  std::vector<std::array<int, 2>> horizon;
  for (int p : order) {
    visible.clear();
    for (size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(pts[p]) - faces[f].offset > eps) {
        visible.push_back(static_cast<int>(f));
      }
    }
    if (visible.empty()) continue;
    for (int f : visible) faces[f].alive = false;
    horizon.clear();
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e], b = v[(e + 1) % 3];
        const auto it = edge_owner.find(edge_key(b, a));
        if (it != edge_owner.end() && faces[it->second].alive) {
          horizon.push_back({a, b});
        }
      }
    }
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const auto it = edge_owner.find(edge_key(v[e], v[(e + 1) % 3]));
        if (it != edge_owner.end() && it->second == f) edge_owner.erase(it);
      }
    }
    for (const auto& [a, b] : horizon) add_face(a, b, p);

    if (faces.size() > 64 && faces.size() > 2 * (edge_owner.size() / 3)) {
      // Compact dead faces so the linear visibility scan stays proportional to
      // the live hull.
      std::vector<HullFace> live;
      live.reserve(edge_owner.size() / 3 + 1);
      for (const auto& f : faces) {
        if (f.alive) live.push_back(f);
      }
      faces.swap(live);
      edge_owner.clear();
      for (size_t f = 0; f < faces.size(); ++f) {
        const auto& v = faces[f].v;
        for (int e = 0; e < 3; ++e) {
          edge_owner[edge_key(v[e], v[(e + 1) % 3])] = static_cast<int>(f);
        }
      }
    }
  }

  ConvexHull hull;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    hull.faces.push_back(f.v);
    hull.vertex_indices.insert(hull.vertex_indices.end(), f.v.begin(), f.v.end());
  }
  std::sort(hull.vertex_indices.begin(), hull.vertex_indices.end());
  hull.vertex_indices.erase(
      std::unique(hull.vertex_indices.begin(), hull.vertex_indices.end()),
      hull.vertex_indices.end());
  return hull;
}

std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  const auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2> h(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace radialdlt
