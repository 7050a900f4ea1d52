#pragma once

#include <vector>

#include "radialdlt/core.hpp"

namespace radialdlt {

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Per-pixel DLT output: object-frame surface points (meters) matched to the
/// camera-frame points back-projected from depth at the same pixels.
struct SurfaceEstimate {
  std::vector<Pixel> pixels;
  std::vector<Vec3> points_obj;
  std::vector<Vec3> points_cam;
  std::vector<double> residuals;

  size_t size() const { return pixels.size(); }

  /// Throws kDimensionMismatch for unequal list lengths and kInvalidArgument
  /// for repeated pixels.
  void validate() const;
};

}  // namespace radialdlt
