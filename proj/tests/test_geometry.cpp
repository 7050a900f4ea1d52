#include <gtest/gtest.h>

#include <limits>
#include <optional>

#include "radialdlt/bvh.hpp"
#include "radialdlt/hull.hpp"
#include "radialdlt/kdtree.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/rng.hpp"

namespace radialdlt {
namespace {

std::vector<Vec3> random_cloud(Rng& rng, int n, const Vec3& half) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back(Vec3(rng.uniform(-half.x(), half.x()),
                       rng.uniform(-half.y(), half.y()),
                       rng.uniform(-half.z(), half.z())));
  }
  return pts;
}

TEST(ConvexHull3d, EveryPointIsInsideEveryFace) {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = random_cloud(rng, 500, Vec3(1.0, 0.5, 0.25));
    const ConvexHull hull = convex_hull_3d(pts);
    ASSERT_GE(hull.faces.size(), 4u);
    for (size_t f = 0; f < hull.faces.size(); ++f) {
      const Vec3 n = hull.face_normal(pts, f);
      const Vec3& a = pts[hull.faces[f][0]];
      for (const Vec3& p : pts) EXPECT_LE(n.dot(p - a), 1e-9);
    }
    // Closed 2-manifold: V - E + F = 2 with E = 3F/2.
    const long v = static_cast<long>(hull.vertex_indices.size());
    const long f = static_cast<long>(hull.faces.size());
    EXPECT_EQ(v - 3 * f / 2 + f, 2);
  }
}

TEST(ConvexHull3d, CubeCornersOnly) {
  const TriangleMesh box = make_box_mesh(Vec3(1, 1, 1), 4);
  const ConvexHull hull = convex_hull_3d(box.vertices());
  for (int i : hull.vertex_indices) {
    const Vec3 q = box.vertices()[i].cwiseAbs();
    EXPECT_NEAR(q.x(), 0.5, 1e-12);
    EXPECT_NEAR(q.y(), 0.5, 1e-12);
    EXPECT_NEAR(q.z(), 0.5, 1e-12);
  }
  EXPECT_EQ(hull.vertex_indices.size(), 8u);
}

TEST(ConvexHull3d, DegenerateInputRaises) {
  const std::vector<Vec3> planar{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  EXPECT_THROW(convex_hull_3d(planar), Error);
  const std::vector<Vec3> three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(convex_hull_3d(three), Error);
}

TEST(ConvexHull2d, SquareWithInteriorAndCollinearPoints) {
  const auto hull = convex_hull_2d(
      {{0, 0}, {1, 0}, {0.5, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}});
  ASSERT_EQ(hull.size(), 4u);
  double area2 = 0.0;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    area2 += a.x * b.y - a.y * b.x;
  }
  EXPECT_DOUBLE_EQ(area2, 2.0);  // counter-clockwise, unit area
}

TEST(KdTree, MatchesBruteForce) {
  Rng rng(2);
  const auto pts = random_cloud(rng, 3000, Vec3(1, 1, 1));
  const KdTree tree(pts);
  for (int q = 0; q < 2000; ++q) {
    const Vec3 query(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                     rng.uniform(-1.2, 1.2));
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pts.size(); ++i) {
      const double d = (pts[i] - query).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const KdTree::Hit hit = tree.nearest(query);
    EXPECT_EQ(hit.index, best);
    EXPECT_EQ(hit.squared_distance, best_d);
  }
}

TEST(KdTree, TiesResolveToLowestIndex) {
  const std::vector<Vec3> pts{{1, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const KdTree tree(pts);
  EXPECT_EQ(tree.nearest(Vec3(2, 0, 0)).index, 0u);
  EXPECT_EQ(tree.nearest(Vec3(0, 0, 0)).index, 0u);
}

// Moller-Trumbore, two-sided; independent of the BVH code path.
std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-15) return std::nullopt;
  const Vec3 s = o - a;
  const double u = s.dot(p) / det;
  if (u < 0 || u > 1) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) / det;
  if (v < 0 || u + v > 1) return std::nullopt;
  const double t = e2.dot(q) / det;
  if (t <= 0) return std::nullopt;
  return t;
}

TEST(Bvh, RayHitsMatchBruteForce) {
  Rng rng(3);
  const TriangleMesh mesh = make_blob_mesh(0.1, 16, 32, 5);
  const TriangleBvh bvh(mesh);
  int hits = 0;
  for (int q = 0; q < 3000; ++q) {
    const Vec3 origin(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), -1.0);
    const Vec3 dir = (Vec3(rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15), 0) -
                      origin)
                         .normalized();
    std::optional<double> best;
    for (const Triangle& t : mesh.triangles()) {
      const auto h = ray_triangle(origin, dir, mesh.vertices()[t[0]],
                                  mesh.vertices()[t[1]], mesh.vertices()[t[2]]);
      if (h && (!best || *h < *best)) best = h;
    }
    const auto hit = bvh.intersect(origin, dir);
    ASSERT_EQ(hit.has_value(), best.has_value());
    if (best) {
      ++hits;
      EXPECT_NEAR(hit->t, *best, 1e-12);
    }
  }
  EXPECT_GT(hits, 1000);
}

TEST(Bvh, ClosestPointMatchesBruteForce) {
  Rng rng(4);
  const TriangleMesh mesh = make_blob_mesh(0.1, 12, 24, 6);
  const TriangleBvh bvh(mesh);
  for (int q = 0; q < 1000; ++q) {
    const Vec3 p(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                 rng.uniform(-0.2, 0.2));
    double best = std::numeric_limits<double>::infinity();
    for (const Triangle& t : mesh.triangles()) {
      const Vec3 c = closest_point_on_triangle(p, mesh.vertices()[t[0]],
                                               mesh.vertices()[t[1]],
                                               mesh.vertices()[t[2]]);
      best = std::min(best, (c - p).squaredNorm());
    }
    EXPECT_NEAR(bvh.closest_point(p).squared_distance, best, 1e-15);
  }
}

TEST(Bvh, ClosestPointOnTriangleRegions) {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  EXPECT_LT((closest_point_on_triangle(Vec3(0.2, 0.2, 3), a, b, c) -
             Vec3(0.2, 0.2, 0)).norm(),
            1e-15);
  EXPECT_EQ(closest_point_on_triangle(Vec3(-1, -1, 0), a, b, c), a);
  EXPECT_EQ(closest_point_on_triangle(Vec3(2, -1, 0), a, b, c), b);
  EXPECT_LT((closest_point_on_triangle(Vec3(1, 1, 0), a, b, c) -
             Vec3(0.5, 0.5, 0))
                .norm(),
            1e-15);
  EXPECT_EQ(closest_point_on_triangle(Vec3(0.5, -2, 1), a, b, c),
            Vec3(0.5, 0, 0));
}

}  // namespace
}  // namespace radialdlt
