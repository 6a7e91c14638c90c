// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual iteration over a Banach pair (X, Y):
//   p_{k+1} = (sigma_k dg* + J_{Y*})^{-1}(J_{Y*}(p_k) + sigma_k T xhat_k)
//   x_{k+1} = (tau_k  df + J_X  )^{-1}(J_X(x_k)   - tau_k  T* p_{k+1})
//   xhat_{k+1} = x_{k+1} + theta_k (x_{k+1} - x_k)
// with three parameter schedules: constant steps (v1), an accelerated
// sequence driven by the primal convexity modulus (v2), and constant steps
// with both moduli giving a linear rate (v3).
#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "banachpd/operators.hpp"
#include "banachpd/resolvents.hpp"
#include "banachpd/spaces.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

struct SaddleProblem {
  LinearOp T;
  PrimalResolvent f;
  DualResolvent gstar;
  std::optional<Vector> saddle_x;  // known saddle point, for diagnostics only
  std::optional<Vector> saddle_p;

  const SpaceDescriptor& X() const { return f.space(); }
  const SpaceDescriptor& Y() const { return gstar.space(); }
  void validate_shapes() const;
};

struct CpState {
  Vector x, p, xhat;
};

// One exact iteration; theta in [0, 1], steps positive.
CpState cp_bs_step(const SaddleProblem& P, const CpState& s, double sigma, double tau,
                   double theta);

struct IterateRecord {
  int k = 0;
  double sigma = 0.0, tau = 0.0, theta = 1.0;
  double misfit = std::numeric_limits<double>::quiet_NaN();    // needs a known saddle
  double lyapunov = std::numeric_limits<double>::quiet_NaN();  // v3 + known saddle
  double err_ref = std::numeric_limits<double>::quiet_NaN();   // needs a reference point
  double gap = std::numeric_limits<double>::quiet_NaN();       // filled by callers
  double primal_change = 0.0;  // relative X-norm change of x
  double elapsed_s = 0.0;
};

enum class StopReason { max_iters, reference_tol, stagnation, diverged };

struct StopRule {
  int max_iters = 1000;
  std::optional<Vector> x_ref;  // stop when ||x_k - x_ref||_1 <= ref_tol
  double ref_tol = 1e-5;
  double stagnation_rtol = 1e-12;  // negative disables the guard
  bool keep_trace = true;
  std::optional<CpState> start;  // defaults to the origin
  std::function<void(const IterateRecord&, const CpState&)> on_iterate;
};

struct SolveResult {
  CpState state;
  Vector x_ergodic, p_ergodic;  // running means over iterates 1..N
  std::vector<IterateRecord> trace;
  int iters = 0;
  StopReason reason = StopReason::max_iters;
  double delta0 = std::numeric_limits<double>::quiet_NaN();     // initial misfit
  double omega = std::numeric_limits<double>::quiet_NaN();      // v3 contraction factor
  double lyapunov0 = std::numeric_limits<double>::quiet_NaN();  // v3 initial energy
};

// Constant steps, theta = 1; requires sigma*tau*||T||^2 < C with
// C in [c_X * c_{Y*}, 1].  Misfit stays within (1 - ||T||^2 sigma tau / C)^{-1}
// of its initial value when a saddle point is supplied.
SolveResult run_v1(const SaddleProblem& P, double sigma, double tau, double C,
                   const StopRule& stop);

// Accelerated schedule theta_k = (1 + gamma*tau_k)^{-1/2}, tau_{k+1} = theta_k tau_k,
// sigma_{k+1} = sigma_k / theta_k; requires sigma0*tau0*||T||^2 <= C and a primal
// penalty with convexity modulus >= gamma.  tau_k sigma_k is invariant.
SolveResult run_v2(const SaddleProblem& P, double tau0, double sigma0, double gamma, double C,
                   const StopRule& stop);

// Constant steps sigma = mu/delta, tau = mu/gamma, theta in [1/(1+mu), 1];
// requires mu*||T|| <= sqrt(gamma*delta*C) and both moduli.  Contracts the
// energy (1-omega) delta B_{Y*}(pbar, p) + gamma B_X(xbar, x) by
// omega = (1+theta)/(2+mu) per iteration.
SolveResult run_v3(const SaddleProblem& P, double gamma, double delta, double mu, double theta,
                   double C, const StopRule& stop);

// Tagged parameter set covering the three schedules, for callers that pick
// the variant at runtime (outer loops, configs, the CLI).  sigma/tau double
// as the v2 initial steps; C is the geometry relaxation shared by all
// variants.
struct SolverSchedule {
  enum class Variant { v1, v2, v3 };
  Variant variant = Variant::v1;
  double sigma = 0.0, tau = 0.0;  // v1 steps; v2 initial steps
  double gamma = 0.0;             // v2/v3 primal convexity modulus
  double delta = 0.0;             // v3 dual convexity modulus
  double mu = 0.0;                // v3 step scale
  double theta = 1.0;             // v3 relaxation
  double C = 0.96;
};

SolveResult run_schedule(const SaddleProblem& P, const SolverSchedule& s, const StopRule& stop);

// Fill the step sizes a schedule leaves at 0 from a measured operator norm,
// keeping the variant premise satisfied with margin safety < 1.
//   v1/v2: missing sigma or tau from sigma*tau*tn^2 = safety*C
//          (both missing: tau = 1/tn); v3: missing mu = safety*sqrt(gamma*
//          delta*C)/tn.  Explicit positive entries pass through unchanged.
SolverSchedule complete_schedule(SolverSchedule s, double op_norm, double safety = 0.96);

// B_{Y*}(p_ref, p)/sigma + B_X(x_ref, x)/tau.
double misfit(const SaddleProblem& P, const Vector& x, const Vector& p, const Vector& x_ref,
              const Vector& p_ref, double sigma, double tau);

// max_{p' in B2} (<Tx, p'> - g*(p') + f(x)) - min_{x' in B1} (f(x') + <Tx', p> - g*(p))
// over axis-aligned boxes; exact separable/scalar solves, +-inf when a box is
// unbounded in a direction of recession.  Nonnegative whenever B1 x B2
// contains a saddle point.
double partial_gap(const SaddleProblem& P, const Vector& x, const Vector& p, const Vector& b1_lo,
                   const Vector& b1_hi, const Vector& b2_lo, const Vector& b2_hi);

// max over the (finite) box of B_Z(v, z0): the distance is convex in its first
// argument, so the maximum sits at a vertex; dimensions capped at 20.
double box_sup_bregman(const SpaceDescriptor& Z, const Vector& z0, const Vector& lo,
                       const Vector& hi);

}  // namespace banachpd
