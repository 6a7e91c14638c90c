// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "banachpd/types.hpp"

namespace testutil {

using banachpd::Index;
using banachpd::Vector;

inline Vector random_vec(std::mt19937_64& g, Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v[j] = u(g);
  return v;
}

inline Vector random_positive(std::mt19937_64& g, Index n, double lo = 0.1, double hi = 2.0) {
  return random_vec(g, n, lo, hi);
}

inline banachpd::Matrix random_mat(std::mt19937_64& g, Index rows, Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  banachpd::Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(g);
  return m;
}

}  // namespace testutil
