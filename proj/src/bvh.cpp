#include "radialdlt/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace radialdlt {
namespace {

constexpr int kLeafSize = 4;
constexpr double kBarycentricSlack = 1e-12;

// Möller–Trumbore, two-sided.
std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = d.cross(e2);
  const double det = e1.dot(pvec);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = o - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < -kBarycentricSlack || u > 1.0 + kBarycentricSlack) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = d.dot(qvec) * inv;
  if (v < -kBarycentricSlack || u + v > 1.0 + kBarycentricSlack) {
    return std::nullopt;
  }
  return e2.dot(qvec) * inv;
}

bool ray_box(const Vec3& o, const Vec3& inv_d, const Eigen::AlignedBox3d& box,
             double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double ta = (box.min()[k] - o[k]) * inv_d[k];
    double tb = (box.max()[k] - o[k]) * inv_d[k];
    if (ta > tb) std::swap(ta, tb);
    // NaN (0 * inf) means the ray lies in the slab plane; keep going.
    if (ta == ta) t0 = std::max(t0, ta);
    if (tb == tb) t1 = std::min(t1, tb);
    if (t0 > t1 * (1.0 + 1e-12) + 1e-15) return false;
  }
  return true;
}

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) {
  const auto& v = mesh.vertices();
  tris_.reserve(mesh.triangles().size());
  for (const Triangle& t : mesh.triangles()) {
    tris_.push_back({v[t[0]], v[t[1]], v[t[2]]});
  }
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!tris_.empty()) {
    nodes_.reserve(2 * tris_.size() / kLeafSize + 2);
    build(0, static_cast<int>(tris_.size()));
  }
}

int TriangleBvh::build(int begin, int end) {
  Node node;
  Eigen::AlignedBox3d centroids;
  for (int i = begin; i < end; ++i) {
    const Tri& t = tris_[order_[i]];
    node.box.extend(t.a).extend(t.b).extend(t.c);
    centroids.extend(Vec3((t.a + t.b + t.c) / 3.0));
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  int axis;
  centroids.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int x, int y) {
                     const Tri& a = tris_[x];
                     const Tri& b = tris_[y];
                     return (a.a + a.b + a.c)[axis] < (b.a + b.b + b.c)[axis];
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<TriangleBvh::RayHit> TriangleBvh::intersect(const Vec3& origin,
                                                          const Vec3& dir,
                                                          double t_min) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_d = dir.cwiseInverse();
  double best_t = std::numeric_limits<double>::infinity();
  size_t best_tri = 0;
  bool found = false;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (!ray_box(origin, inv_d, n.box, best_t)) continue;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int ti = order_[i];
        const Tri& t = tris_[ti];
        const auto hit = ray_triangle(origin, dir, t.a, t.b, t.c);
        if (!hit || !(*hit > t_min)) continue;
        if (*hit < best_t ||
            (*hit == best_t && static_cast<size_t>(ti) < best_tri)) {
          best_t = *hit;
          best_tri = static_cast<size_t>(ti);
          found = true;
        }
      }
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  if (!found) return std::nullopt;
  return RayHit{best_t, best_tri};
}

TriangleBvh::ClosestPoint TriangleBvh::closest_point(const Vec3& query) const {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (n.box.squaredExteriorDistance(query) > best.squared_distance) continue;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const Tri& t = tris_[order_[i]];
        const Vec3 c = closest_point_on_triangle(query, t.a, t.b, t.c);
        const double d2 = (c - query).squaredNorm();
        if (d2 < best.squared_distance) {
          best = {c, d2, static_cast<size_t>(order_[i])};
        }
      }
    } else {
      // Visit the nearer child first (pushed last).
      const double dl = nodes_[n.left].box.squaredExteriorDistance(query);
      const double dr = nodes_[n.right].box.squaredExteriorDistance(query);
      if (dl < dr) {
        stack[top++] = n.right;
        stack[top++] = n.left;
      } else {
        stack[top++] = n.left;
        stack[top++] = n.right;
      }
    }
  }
  return best;
}

}  // namespace radialdlt
