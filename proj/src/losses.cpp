#include "radialdlt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radialdlt {
namespace {

size_t check_pair(const ChannelMap& pred, const ChannelMap& gt) {
  if (!pred.same_layout(gt) || pred.values.size() != gt.values.size() ||
      !(pred.mask == gt.mask)) {
    throw Error(ErrorCode::kShapeMismatch,
                "prediction and ground truth differ in shape or mask");
  }
  const size_t n = gt.mask.count();
  if (n == 0) throw Error(ErrorCode::kEmptyMask, "loss mask is empty");
  return n;
}

}  // namespace

void LossWeights::validate() const {
  if (!(radial >= 0.0 && coord >= 0.0 && pseudo_symmetric >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be >= 0");
  }
}

double radial_loss(const RadialMapStack& pred, const RadialMapStack& gt) {
  const size_t n = check_pair(pred, gt);
  const size_t c = static_cast<size_t>(gt.channels);
  double sum = 0.0;
  for (size_t i = 0; i < gt.mask.size(); ++i) {
    if (!gt.mask.at_index(i)) continue;
    for (size_t j = 0; j < c; ++j) {
      sum += std::abs(pred.values[i * c + j] - gt.values[i * c + j]);
    }
  }
  return sum / static_cast<double>(n * c);
}

double soft_l1(double diff) {
  const double a = std::abs(diff);
  return a <= 0.1 ? 5.0 * a * a : a - 0.05;
}

double coord_loss(const NormalizedCoordMap& pred,
                  const NormalizedCoordMap& gt) {
  const size_t n = check_pair(pred, gt);
  const size_t c = static_cast<size_t>(gt.channels);
  double sum = 0.0;
  for (size_t i = 0; i < gt.mask.size(); ++i) {
    if (!gt.mask.at_index(i)) continue;
    for (size_t j = 0; j < c; ++j) {
      sum += soft_l1(gt.values[i * c + j] - pred.values[i * c + j]);
    }
  }
  return sum / static_cast<double>(n * c);
}

int coord_bin(double c, int n_b) {
  const int b = static_cast<int>(std::floor(c * n_b));
  return std::clamp(b, 0, n_b - 1);
}

double pseudo_symmetric_loss(const NormalizedCoordMap& pred,
                             const NormalizedCoordMap& gt,
                             const SymmetrySet& sym, int n_b,
                             const TriangleMesh& mesh) {
  if (sym.size() == 0) {
    throw Error(ErrorCode::kEmptySymmetrySet, "symmetry set is empty");
  }
  if (n_b < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bin count must be >= 2");
  }
  if (gt.channels != 3) {
    throw Error(ErrorCode::kShapeMismatch, "coordinate maps need 3 channels");
  }
  const size_t n = check_pair(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  for (size_t s = 0; s < sym.size(); ++s) {
    const Mat3& rot = sym.rotations()[s];
    double sum = 0.0;
    for (size_t i = 0; i < gt.mask.size(); ++i) {
      if (!gt.mask.at_index(i)) continue;
      Vec3 c(gt.values[i * 3], gt.values[i * 3 + 1], gt.values[i * 3 + 2]);
      // Identity is applied verbatim so the un-rotated map stays bit-exact.
      if (s != 0) c = normalize_coord(mesh, rot * denormalize_coord(mesh, c));
      for (int k = 0; k < 3; ++k) {
        const int d = coord_bin(pred.values[i * 3 + k], n_b) -
                      coord_bin(c[k], n_b);
        sum += static_cast<double>(d * d);
      }
    }
    best = std::min(best, sum / static_cast<double>(n * 3));
  }
  return best;
}

double total_loss(double radial, double coord, double pseudo_symmetric,
                  const LossWeights& w) {
  w.validate();
  return w.radial * radial + w.coord * coord +
         w.pseudo_symmetric * pseudo_symmetric;
}

}  // namespace radialdlt
