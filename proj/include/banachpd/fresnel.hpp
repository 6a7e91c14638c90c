// SPDX-License-Identifier: Apache-2.0
//
// Near-field propagation on a periodic N x N grid and the intensity forward
// map for phase objects, with its Frechet derivative and adjoint.  The
// magnified detector coordinates are carried implicitly: everything is
// computed on the object-plane grid with the effective distance D/M.
#pragma once

#include "banachpd/operators.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

struct FresnelConfig {
  Index n = 64;                    // grid is n x n, n even
  double kappa = 1.0;              // wavenumber
  double source_distance = 1.0;    // R
  double detector_distance = 1.0;  // D
  double pixel_scale = 1.0;        // frequency mapping xi = integer / pixel_scale

  double magnification() const { return (source_distance + detector_distance) / source_distance; }
  double chirp() const { return detector_distance / (magnification() * kappa); }
  void validate() const;
};

// F^{-1}( exp(-i c |xi|^2) . F field ); unitary on l2 for any real c.
CVector fresnel_propagate(const FresnelConfig& cfg, const CVector& field, double c);

// T(phi) = (1/M^2) |P_{D/M} exp(-i kappa phi)|^2, flattened n*n intensity.
Vector phase_forward(const FresnelConfig& cfg, const Vector& phi);

// h -> (2/M^2) Re( conj(w) . P(-i kappa O_phi . h) ) with w = P(O_phi);
// the adjoint reverses the chain through the conjugate propagator.
LinearOp phase_derivative(const FresnelConfig& cfg, const Vector& phi);

NonlinearOp phase_operator(const FresnelConfig& cfg);

}  // namespace banachpd
