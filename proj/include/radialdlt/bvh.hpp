#pragma once

#include <optional>
#include <vector>

#include "radialdlt/core.hpp"
#include "radialdlt/mesh.hpp"

namespace radialdlt {

/// Bounding volume hierarchy over the triangles of a mesh, in whatever frame
/// the mesh vertices are expressed. Used for ray casting (oracle renders) and
/// point-to-surface closest-point queries (ICP, ADD-S on surfaces).
class TriangleBvh {
 public:
  struct RayHit {
    double t = 0.0;  // ray parameter: hit = origin + t * dir
    size_t triangle = 0;
  };
  struct ClosestPoint {
    Vec3 point = Vec3::Zero();
    double squared_distance = 0.0;
    size_t triangle = 0;
  };

  TriangleBvh() = default;
  explicit TriangleBvh(const TriangleMesh& mesh);

  /// Nearest intersection with t > t_min (two-sided). Ties on t resolve to the
  /// lowest triangle index, so results do not depend on traversal order.
  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir,
                                  double t_min = 0.0) const;

  ClosestPoint closest_point(const Vec3& query) const;

  bool empty() const { return tris_.empty(); }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;  // child indices; leaf when left < 0
    int right = -1;
    int begin = 0;  // leaf triangle range into order_
    int end = 0;
  };
  struct Tri {
    Vec3 a, b, c;
  };

  int build(int begin, int end);

  std::vector<Tri> tris_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Closest point to `p` on triangle (a, b, c).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

}  // namespace radialdlt
