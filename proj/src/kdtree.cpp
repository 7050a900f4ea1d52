#include "radialdlt/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace radialdlt {

KdTree::KdTree(std::span<const Vec3> points)
    : points_(points.begin(), points.end()),
      order_(points.size()),
      split_(points.size(), 0) {
  std::iota(order_.begin(), order_.end(), size_t{0});
  build(0, order_.size(), 0);
}

void KdTree::build(size_t lo, size_t hi, int depth) {
  if (hi - lo <= 1) return;
  // Split on the axis of largest spread rather than cycling.
  Vec3 mn = points_[order_[lo]], mx = mn;
  for (size_t i = lo; i < hi; ++i) {
    mn = mn.cwiseMin(points_[order_[i]]);
    mx = mx.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (mx - mn).maxCoeff(&axis);
  const size_t mid = (lo + hi) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid,
                   order_.begin() + hi, [&](size_t a, size_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  split_[mid] = axis;
  build(lo, mid, depth + 1);
  build(mid + 1, hi, depth + 1);
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  Hit best{0, std::numeric_limits<double>::infinity()};
  search(0, order_.size(), query, best);
  return best;
}

void KdTree::search(size_t lo, size_t hi, const Vec3& q, Hit& best) const {
  if (lo >= hi) return;
  const size_t mid = (lo + hi) / 2;
  const size_t idx = order_[mid];
  const double d2 = (points_[idx] - q).squaredNorm();
  if (d2 < best.squared_distance ||
      (d2 == best.squared_distance && idx < best.index)) {
    best = {idx, d2};
  }
  if (hi - lo == 1) return;
  const int axis = split_[mid];
  const double delta = q[axis] - points_[idx][axis];
  const bool left_first = delta < 0.0;
  if (left_first) {
    search(lo, mid, q, best);
  } else {
    search(mid + 1, hi, q, best);
  }
  if (delta * delta <= best.squared_distance) {
    if (left_first) {
      search(mid + 1, hi, q, best);
    } else {
      search(lo, mid, q, best);
    }
  }
}

}  // namespace radialdlt
