// SPDX-License-Identifier: Apache-2.0
//
// Catalog of generalized resolvents (step*dh + J)^{-1} for the penalties and
// data fidelities handled by the primal-dual solver.  Everything here is a
// closed form or a scalar root/fixed-point solve; the brute-force certifier
// lives in argmin_oracle.hpp and is test-only.
#pragma once

#include <functional>

#include "banachpd/spaces.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

// Primal penalties f:
//   power_norm  f(x) = (scale/r) ||x||_X^r
//   l1          f(x) = scale * sum_j |x_j|          (weighted_lr spaces only)
//   box         f(x) = 0 on {lower <= x <= upper}, +inf outside  (weighted_lr only)
//   zero        f(x) = 0
struct PrimalFnSpec {
  enum class Tag { power_norm, l1, box, zero };
  Tag tag = Tag::zero;
  double r = 2.0;
  double scale = 1.0;
  Vector lower, upper;  // box bounds; +-inf entries allowed

  static PrimalFnSpec power(double r, double scale = 1.0);
  static PrimalFnSpec l1(double scale = 1.0);
  static PrimalFnSpec box(Vector lower, Vector upper);
  static PrimalFnSpec zero();
};

// Data fidelities g (arguments live on the Y side, conjugates on Y*):
//   quadratic_shift  g(v) = 0.5 ||v - y0||_Y^2
//   kl_poisson       g(v) = sum_j (v+shift)_j - y_obs_j ln (v+shift)_j, dom v+shift >= 0,
//                    with the 0 ln 0 = 0 convention; requires Y = weighted l2.
// `offset` is carried along for fidelity-weight construction in outer loops;
// `shift` is the affine recentering used when g is built around a linearization.
struct DataFidelitySpec {
  enum class Tag { quadratic_shift, kl_poisson };
  Tag tag = Tag::quadratic_shift;
  Vector y0;
  Vector y_obs;
  Vector weights;
  double offset = 0.0;
  Vector shift;

  static DataFidelitySpec quadratic(Vector y0);
  static DataFidelitySpec kl(Vector y_obs, Vector weights, double offset = 0.0,
                             Vector shift = Vector());
};

// Maximal root of ts * a^{r-1} + a = target on a >= 0 (unique: the left side is
// strictly increasing).  Safeguarded Newton, residual <= 1e-12 * (1 + target).
double power_root(double ts, double r, double target);

// (tau d[(scale/r)||.||^r] + J_X)^{-1}(xstar) = J_{X*}(xstar) / (tau*scale*a^{r-2} + 1)
// with a = power_root(tau*scale, r, ||xstar||_{X*}).  r = 2 short-circuits.
Vector res_power_norm(const SpaceDescriptor& X, double r_f, double tau, const Vector& xstar,
                      double scale = 1.0);

// Componentwise soft threshold by tau*scale, then J_{X*}.  Exact because the
// dual-to-primal map preserves sign patterns componentwise.
Vector res_l1(const SpaceDescriptor& X, double tau, const Vector& xstar, double scale = 1.0);

// Generalized projection of J_{X*}(xstar) onto an axis-aligned box: the
// Bregman-nearest box point.  Solved by monotone scalar clipping (see
// box_min_powernorm); step-independent since indicators absorb scaling.
Vector res_box(const SpaceDescriptor& X, const Vector& lower, const Vector& upper,
               const Vector& xstar);

// f = 0: the resolvent degenerates to the dual-to-primal duality map.
Vector res_zero(const SpaceDescriptor& X, const Vector& xstar);

// argmin over {lower <= z <= upper} of (scale/r_f) ||z||_X^{r_f} + <z, linear>.
// Stationarity pins each coordinate to a clipped signed power of linear_j,
// parametrized by nu = ||z||_X; nu solves a scalar fixed point with exactly
// one positive root.  Requires a weighted_lr space, r_f > 1, scale > 0.
Vector box_min_powernorm(const SpaceDescriptor& X, double r_f, double scale,
                         const Vector& linear, const Vector& lower, const Vector& upper);

// inner(sigma, y) must solve (J_{Y*} o dg + sigma I)^{-1}(y) for the primal
// fidelity g.  Then (sigma dg* + J_{Y*})^{-1}(y) = J_Y(y - sigma * inner(sigma, y)),
// which evaluates the conjugate resolvent without any formula for g*.
using InnerResolvent = std::function<Vector(double, const Vector&)>;
Vector moreau_gstar_resolvent(const SpaceDescriptor& Y, double sigma, const InnerResolvent& inner,
                              const Vector& y);

// g = 0.5 ||. - y0||_Y^2: the decomposition collapses to J_Y((y - sigma*y0)/(sigma+1)).
Vector res_quadratic_data(const SpaceDescriptor& Y, double sigma, const Vector& y0,
                          const Vector& y);

// (J_{Y*} o dS + sigma I)^{-1}(y) for the Poisson log-likelihood fidelity over
// Y = weighted l2: componentwise positive root of a quadratic.  The shifted
// variant solves the same inclusion for g(z) = S(z + shift).
Vector res_kl_inner(double sigma, const Vector& y_obs, const Vector& weights, const Vector& y);
Vector res_kl_inner_shifted(double sigma, const Vector& y_obs, const Vector& weights,
                            const Vector& shift, const Vector& y);

// Primal-side oracle z = (tau df + J_X)^{-1}(xstar) with function evaluation
// and convexity metadata.  Pure and immutable after construction.
class PrimalResolvent {
 public:
  PrimalResolvent(SpaceDescriptor X, PrimalFnSpec fn);

  Vector resolve(double tau, const Vector& xstar) const;
  // f(x); +inf outside the box domain.
  double value(const Vector& x) const;
  // Largest certified gamma with f(u) >= f(x) + <u-x, J_X(x)-subgradient> + gamma*B_X(u,x).
  double convexity_modulus() const { return gamma_; }
  const SpaceDescriptor& space() const { return X_; }
  const PrimalFnSpec& fn() const { return fn_; }

 private:
  SpaceDescriptor X_;
  PrimalFnSpec fn_;
  double gamma_ = 0.0;
};

// Dual-side oracle p = (sigma dg* + J_{Y*})^{-1}(y), y on the Y side.
class DualResolvent {
 public:
  DualResolvent(SpaceDescriptor Y, DataFidelitySpec fid);

  Vector resolve(double sigma, const Vector& y) const;
  // g(v); +inf outside the fidelity domain.
  double value(const Vector& v) const;
  // g*(p); +inf outside dom g*.
  double conjugate_value(const Vector& p) const;
  // Largest certified delta with g*(q) >= g*(p) + <q-p, subgradient> + delta*B_{Y*}(q,p).
  double convexity_modulus() const { return delta_; }
  const SpaceDescriptor& space() const { return Y_; }
  const DataFidelitySpec& fn() const { return fid_; }

 private:
  SpaceDescriptor Y_;
  DataFidelitySpec fid_;
  Vector kl_weights_;  // resolved against the space descriptor at construction
  double delta_ = 0.0;
};

}  // namespace banachpd
