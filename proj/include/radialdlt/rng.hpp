#pragma once

#include <cstdint>
#include <random>

#include "radialdlt/core.hpp"

namespace radialdlt {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here instead of using
/// <random>'s, whose algorithms differ between standard libraries, so a seed
/// produces the same draws on every platform:
///   - uniform(): top 53 bits of one engine output, scaled into [0, 1)
///   - gaussian(): Marsaglia polar method, second variate cached
///   - uniform_index(n): rejection sampling, no modulo bias
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform rotation over SO(3) from a normalized 4D Gaussian quaternion.
  Mat3 random_rotation();
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

/// Derives an independent child seed, e.g. one per frame or per RANSAC run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace radialdlt
