// SPDX-License-Identifier: Apache-2.0
//
// Seeded data perturbation.  All draws come from a pinned splitmix64-based
// generator so a (config, seed) pair reproduces the same bytes on every run
// of the same build; nothing here depends on std::random distributions.
#pragma once

#include <cstdint>

#include "banachpd/types.hpp"

namespace banachpd {

// Independent stream seed for repetition k of a master seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  // gaussian: relative l2 perturbation size; 0 returns the data unchanged.
  // poisson: any level > 0 enables resampling, 0 returns the data unchanged.
  double level = 0.0;
  double photon_scale = 1e4;  // poisson: y_j ~ Poisson(scale * y_j) / scale
};

// gaussian: y + level * ||y||_2 * xi / ||xi||_2 with xi iid standard normal,
// so the relative l2 error equals level by construction.
// poisson: componentwise Poisson counts at intensity scale*y_j, rescaled;
// exact inversion sampling below mean 256, rounded normal approximation
// above.  Negative intensities throw.
Vector make_noise(const Vector& y_true, const NoiseSpec& spec, std::uint64_t seed);

// Deterministic uniform fills on [lo, hi) from the same pinned generator;
// used to build seeded test problems that survive compiler upgrades.
Vector seeded_uniform(Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0);
Matrix seeded_uniform_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0,
                             double hi = 1.0);

}  // namespace banachpd
