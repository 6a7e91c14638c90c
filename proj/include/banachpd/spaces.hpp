// SPDX-License-Identifier: Apache-2.0
//
// Geometry of the sequence spaces the solver iterates in.
//
// Two families are supported:
//   * weighted l^r: ||v|| = (sum_j w_j |v_j|^r)^(1/r), w_j > 0,
//   * periodic discrete Sobolev grids: ||v|| = ||Lambda_s v||_{l^r} with the
//     Bessel multiplier Lambda_s = F^-1 diag[(1+|xi|^2)^(-s/2)] F on an
//     (a*T_N)^d grid, frequencies xi in (1/a){-N/2,..,N/2-1}^d.
//
// Throughout, the dual pairing is the plain euclidean one, so the dual of
// l^r_W is l^{r*}_{W^(-r*/r)} and the dual of the (s, r) Sobolev grid is
// (-s, r*). duality_map(X, q, .) is the gauge-q duality map X -> X*; its
// inverse is duality_map(dual(X), q*, .). bregman(X, u, x) is the distance
// induced by 1/2 ||.||^2.

#pragma once

#include "banachpd/types.hpp"

namespace banachpd {

enum class SpaceKind { weighted_lr, sobolev_periodic };

struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::weighted_lr;
  double r = 2.0;  // norm exponent, must lie in (1, inf)

  // weighted_lr
  Vector weights;

  // sobolev_periodic
  double s = 0.0;          // smoothness order of the Bessel multiplier
  int dims = 1;            // spatial dimension d
  Index n_axis = 0;        // N, grid points per axis, even and >= 2
  double grid_scale = 1.0; // a in a*T_N

  Index dim() const;
};

SpaceDescriptor make_weighted_lr(double r, Vector weights);
SpaceDescriptor make_lr(double r, Index n);  // unit weights
SpaceDescriptor make_sobolev(double r, double s, int dims, Index n_axis,
                             double grid_scale = 1.0);

// Throws std::invalid_argument on malformed descriptors.
void validate(const SpaceDescriptor& X);

double conjugate_exponent(double r);

// Dual-space descriptor; an involution (dual(dual(X)) == X up to roundoff).
SpaceDescriptor dual(const SpaceDescriptor& X);

double norm(const SpaceDescriptor& X, const Vector& v);

// J_{q,X}(v) in X*.  J(0) = 0; <v, J(v)> = ||v||^q; ||J(v)||_* = ||v||^(q-1).
Vector duality_map(const SpaceDescriptor& X, double q, const Vector& v);
inline Vector duality_map(const SpaceDescriptor& X, const Vector& v) {
  return duality_map(X, 2.0, v);
}

// B_X(u, x) = 1/2||u||^2 - 1/2||x||^2 - <u - x, J_2(x)>, nonnegative.
double bregman(const SpaceDescriptor& X, const Vector& u, const Vector& x);

// Largest c used in B_X(u,x) >= c/2 ||u-x||^2: exactly 1 for r = 2,
// 0.99*(r-1) for r in (1,2); throws for r > 2 (space not 2-convex).
double convexity_constant(const SpaceDescriptor& X);

// Lambda_{s,N} v on the grid of X (X must be sobolev_periodic; the X.s field
// is ignored, s is the argument).  Exact semigroup: Lambda_s Lambda_t = Lambda_{s+t}.
Vector bessel_potential(const SpaceDescriptor& X, double s, const Vector& v);

}  // namespace banachpd
