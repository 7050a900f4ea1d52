#include "radialdlt/rng.hpp"

#include <cmath>

namespace radialdlt {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * scale;
  has_spare_ = true;
  return x * scale;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

Mat3 Rng::random_rotation() {
  Eigen::Quaterniond q;
  double n2;
  do {
    q = Eigen::Quaterniond(gaussian(), gaussian(), gaussian(), gaussian());
    n2 = q.squaredNorm();
  } while (n2 < 1e-12);
  q.normalize();
  return q.toRotationMatrix();
}

Vec3 Rng::unit_vector() {
  Vec3 v;
  do {
    v = Vec3(gaussian(), gaussian(), gaussian());
  } while (v.squaredNorm() < 1e-12);
  return v.normalized();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace radialdlt
