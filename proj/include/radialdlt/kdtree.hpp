#pragma once

#include <span>
#include <vector>

#include "radialdlt/core.hpp"

namespace radialdlt {

/// Static 3D k-d tree for exact nearest-neighbour queries. The point array is
/// copied; queries are const and safe to run concurrently.
class KdTree {
 public:
  struct Hit {
    size_t index = 0;
    double squared_distance = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  bool empty() const { return points_.empty(); }
  size_t size() const { return points_.size(); }
  const Vec3& point(size_t i) const { return points_[i]; }

  /// Ties resolve to the lower original index. Requires a non-empty tree.
  Hit nearest(const Vec3& query) const;

 private:
  void build(size_t lo, size_t hi, int depth);
  void search(size_t lo, size_t hi, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<size_t> order_;  // tree layout: median of [lo,hi) at (lo+hi)/2
  std::vector<int> split_;     // split axis per tree slot
};

}  // namespace radialdlt
