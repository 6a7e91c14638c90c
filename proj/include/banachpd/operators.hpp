// SPDX-License-Identifier: Apache-2.0
//
// Forward-operator abstractions.  Pairings are plain euclidean throughout, so
// adjoints are matrix transposes / conjugate chains; Banach geometry enters
// only through the space descriptors handed to the norm estimator.
#pragma once

#include <cstdint>
#include <functional>

#include "banachpd/spaces.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

struct LinearOp {
  SpaceDescriptor domain;  // X
  SpaceDescriptor range;   // Y
  std::function<Vector(const Vector&)> apply;    // X -> Y
  std::function<Vector(const Vector&)> adjoint;  // Y* -> X*
  double norm_estimate = 0.0;                    // cached; 0 = not yet estimated
};

struct NonlinearOp {
  SpaceDescriptor domain;
  SpaceDescriptor range;
  std::function<Vector(const Vector&)> apply;
  std::function<LinearOp(const Vector&)> derivative_at;
};

// Dense matrix wrapper; descriptors default to plain l2 of matching sizes.
LinearOp matrix_op(Matrix A);
LinearOp matrix_op(Matrix A, SpaceDescriptor X, SpaceDescriptor Y);

// Discretized convolution with kernel k(t) = exp(-kernel_decay * |t|), mapping
// n_x samples on [-1/2, 1/2] to n_y samples on [-1, 1].  Trapezoidal weights
// h = 1/(n_x - 1) with half weight at the endpoints; unit_quadrature drops the
// weights entirely (entries are bare kernel samples).
LinearOp conv_operator(double kernel_decay, Index n_x, Index n_y, bool unit_quadrature = false);

struct PowerMethodResult {
  double value = 0.0;  // ||T x||_Y at the final unit iterate
  Vector x;            // final iterate, unit norm in X
  int iters = 0;
  bool converged = false;
};

// Norm estimation by the duality-mapped power iteration
//   x_{k+1} proportional to J_{X*}(T* J_Y(T x_k)),  normalized in X.
// Exact for l2 -> l2; for r != 2 the value is a certified lower bound whose
// primal/adjoint estimates are expected to agree to ~1% at stationarity.
PowerMethodResult power_method(const LinearOp& T, const SpaceDescriptor& X,
                               const SpaceDescriptor& Y, int max_iters = 500, double tol = 1e-8,
                               std::uint64_t seed = 0x9E3779B97F4A7C15ull);

}  // namespace banachpd
