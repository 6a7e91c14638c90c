// SPDX-License-Identifier: Apache-2.0
#include "banachpd/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace banachpd {
namespace {

// splitmix64: Stafford mix13 finalizer over a Weyl sequence.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on [2^-53, 1]: strictly positive, log-safe
  double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double next_normal() {
    const double u = next_unit();
    const double v = next_unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
  }

  // exact inversion below kNormalCutover, rounded normal approximation above
  double next_poisson(double mean) {
    if (mean <= 0.0) return 0.0;
    if (mean < kNormalCutover) {
      const double u = next_unit();
      double p = std::exp(-mean), cdf = p;
      double k = 0.0;
      while (u > cdf && k < 8.0 * (mean + 16.0)) {
        k += 1.0;
        p *= mean / k;
        cdf += p;
      }
      return k;
    }
    return std::max(0.0, std::round(mean + std::sqrt(mean) * next_normal()));
  }

  static constexpr double kNormalCutover = 256.0;
};

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng g(seed ^ (0xA02BDBF7BB3C0A7ull * (stream + 1)));
  g.next_u64();
  return g.next_u64();
}

Vector make_noise(const Vector& y_true, const NoiseSpec& spec, std::uint64_t seed) {
  if (!(spec.level >= 0.0)) throw std::invalid_argument("make_noise: level must be >= 0");
  if (spec.level == 0.0) return y_true;
  Rng g(seed);

  if (spec.kind == NoiseKind::gaussian) {
    Vector xi(y_true.size());
    for (Index j = 0; j < xi.size(); ++j) xi[j] = g.next_normal();
    const double nx = xi.norm();
    if (nx == 0.0) return y_true;  // unreachable for positive dimension, kept for safety
    return y_true + (spec.level * y_true.norm() / nx) * xi;
  }

  if (!(spec.photon_scale > 0.0))
    throw std::invalid_argument("make_noise: poisson mode needs photon_scale > 0");
  if ((y_true.array() < 0.0).any())
    throw std::invalid_argument("make_noise: poisson mode needs nonnegative intensities");
  Vector out(y_true.size());
  for (Index j = 0; j < out.size(); ++j)
    out[j] = g.next_poisson(spec.photon_scale * y_true[j]) / spec.photon_scale;
  return out;
}

Vector seeded_uniform(Index n, std::uint64_t seed, double lo, double hi) {
  if (n < 0 || !(hi > lo)) throw std::invalid_argument("seeded_uniform: bad range");
  Rng g(seed);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v[j] = lo + (hi - lo) * g.next_unit();
  return v;
}

Matrix seeded_uniform_matrix(Index rows, Index cols, std::uint64_t seed, double lo, double hi) {
  if (rows < 0 || cols < 0 || !(hi > lo))
    throw std::invalid_argument("seeded_uniform_matrix: bad range");
  Rng g(seed);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)  // row-major fill, independent of storage order
    for (Index j = 0; j < cols; ++j) a(i, j) = lo + (hi - lo) * g.next_unit();
  return a;
}

}  // namespace banachpd
