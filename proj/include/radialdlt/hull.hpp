#pragma once

#include <array>
#include <span>
#include <vector>

#include "radialdlt/core.hpp"

namespace radialdlt {

struct ConvexHull {
  /// Outward-oriented (counter-clockwise seen from outside) triangles indexing
  /// the input point list.
  std::vector<std::array<int, 3>> faces;
  /// Sorted, unique input indices that appear in some face.
  std::vector<int> vertex_indices;

  Vec3 face_normal(std::span<const Vec3> points, size_t f) const;
};

/// Incremental 3D convex hull. Points within ~1e-9 of the running scale of a
/// face plane are treated as on it. A point inserted before the face that
/// covers it may remain as a vertex lying on a flat region of the hull.
/// Throws kDegenerateMesh for fewer than four points or when all points are
/// (nearly) coplanar.
ConvexHull convex_hull_3d(std::span<const Vec3> points);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint, collinear
/// points dropped.
std::vector<Point2> convex_hull_2d(std::vector<Point2> points);

}  // namespace radialdlt
