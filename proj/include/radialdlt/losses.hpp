#pragma once

#include "radialdlt/core.hpp"
#include "radialdlt/mesh.hpp"
#include "radialdlt/oracle.hpp"

namespace radialdlt {

struct LossWeights {
  double radial = 0.6;
  double coord = 0.2;
  double pseudo_symmetric = 0.2;

  /// Throws kInvalidArgument for negative weights.
  void validate() const;
  /// Weights for symmetric objects: coordinate terms disabled.
  static LossWeights symmetric_object() { return {0.6, 0.0, 0.0}; }
};

/// Mean |pred - gt| over in-mask pixels and channels.
/// Throws kShapeMismatch for differing layouts or masks, kEmptyMask when the
/// mask is empty.
double radial_loss(const RadialMapStack& pred, const RadialMapStack& gt);

/// Soft L1 term per element: 5 d^2 for |d| <= 0.1, |d| - 0.05 above.
double soft_l1(double diff);

/// Mean soft L1 over in-mask coordinate elements. Same errors as radial_loss.
double coord_loss(const NormalizedCoordMap& pred, const NormalizedCoordMap& gt);

/// Bin index floor(c n_b), with c = 1 mapped to n_b - 1.
int coord_bin(double c, int n_b);

inline constexpr int kDefaultBins = 32;

/// Minimum over symmetries S of the mean squared bin-index difference between
/// pred and the ground-truth map regenerated under S: every gt coordinate is
/// mapped back to its object point, rotated by S and renormalised.
/// Throws kEmptySymmetrySet, kInvalidArgument for n_b < 2 and the
/// coord_loss shape errors.
double pseudo_symmetric_loss(const NormalizedCoordMap& pred,
                             const NormalizedCoordMap& gt,
                             const SymmetrySet& sym, int n_b,
                             const TriangleMesh& mesh);

double total_loss(double radial, double coord, double pseudo_symmetric,
                  const LossWeights& w = {});

}  // namespace radialdlt
