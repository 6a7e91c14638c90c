// SPDX-License-Identifier: Apache-2.0
//
// Brute-force certifier for the closed-form resolvents: minimizes
//   F(z) = step * h(z) + 0.5 ||z||_X^2 - <z, input>
// by cyclic coordinate descent with golden-section line searches, so its
// minimizer is (step*dh + J_X)^{-1}(input).  Handles +inf regions (indicator
// h) by shrinking each line-search bracket to the feasible segment.  Small
// dimensions and tests only; never called by the solver.
#pragma once

#include <functional>

#include "banachpd/spaces.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

struct ArgminResult {
  Vector z;
  double objective = 0.0;
  bool converged = false;
  int sweeps = 0;
};

// h returns the penalty value (may be +inf or NaN outside its domain).
// start must be feasible when given; defaults to J_{X*}(input).
ArgminResult argmin_oracle(const SpaceDescriptor& X, const std::function<double(const Vector&)>& h,
                           double step, const Vector& input, const Vector* start = nullptr);

}  // namespace banachpd
