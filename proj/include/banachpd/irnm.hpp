// SPDX-License-Identifier: Apache-2.0
//
// Outer regularization drivers.  tikhonov_solve assembles
//   min_x S(y_delta; T x) + alpha R(x)
// as a saddle problem and hands it to the primal-dual solver; irnm_run wraps
// that in a Newton-type loop for nonlinear forward maps: re-linearize,
// reweight the range space against the predicted intensities, solve the
// resulting Tikhonov problem, shrink alpha geometrically.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "banachpd/operators.hpp"
#include "banachpd/resolvents.hpp"
#include "banachpd/solver.hpp"
#include "banachpd/spaces.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

// Data term S(y_delta; v) as a diagnostic scalar: quadratic is
// 0.5 ||v - y_delta||_l2^2 (plain, unweighted); kl_poisson is
// sum_j v_j - y_delta_j ln v_j with the 0 ln 0 = 0 convention, +inf as soon
// as some v_j < 0 or v_j = 0 while y_delta_j > 0.
enum class FidelityKind { quadratic, kl_poisson };

double data_misfit(FidelityKind kind, const Vector& y_delta, const Vector& v);

struct TikhonovSpec {
  LinearOp T;  // forward operator; X/Y below override its descriptors
  SpaceDescriptor X, Y;
  DataFidelitySpec fidelity;  // carries the data (y0, or y_obs for kl)
  PrimalFnSpec penalty;       // power_norm or l1
  double alpha = 1.0;
  SolverSchedule schedule;
  StopRule stop;  // stop.start, when set, overrides the default guess
};

// f = alpha * R, g = S(y_delta; .) on (X, Y).  For kl the fidelity weights
// are filled in from Y when left empty.
SaddleProblem assemble_tikhonov(const TikhonovSpec& spec);

// Start state matched to the dual optimality inclusion T x0 in dg*(p0):
// p0 = J_Y(T x0 - y0) for the quadratic fidelity, the componentwise fidelity
// subgradient at the predicted data for kl, and p0 = 0 when the prediction
// leaves the fidelity domain.  x0 defaults to the origin.
CpState warm_start(const SaddleProblem& P, std::optional<Vector> x0 = std::nullopt);

struct TikhonovResult {
  SaddleProblem problem;
  SolveResult solve;
  Vector x;  // final primal iterate
};

TikhonovResult tikhonov_solve(const TikhonovSpec& spec);

// One Newton-type outer loop.  Per step n (iterate x_n, regularizer alpha_n):
//   A    = T'[x_n], with its norm re-estimated by the power method;
//   Y_n  = l2 weighted by 1/(T(x_n) + eps) when reweight_range is set
//          (predicted intensities must stay > -eps), the base Y otherwise;
//   data = residual-shifted so the inner problem is solved for x itself:
//          y0 = y_delta - T(x_n) + A x_n for the quadratic fidelity, the
//          affine recentering shift = T(x_n) - A x_n for kl;
//   x_{n+1} = inner primal-dual solve, warm-started at x_n;
//   alpha_{n+1} = rho * alpha_n.
// When schedule.sigma (v1/v2) or schedule.mu (v3) is left at 0 it is derived
// per step from the measured norm: sigma = step_safety * C / (tau ||A||^2),
// mu = step_safety * sqrt(gamma delta C) / ||A||.
struct IrnmSpec {
  NonlinearOp T;
  SpaceDescriptor X, Y;  // base spaces; Y is replaced per step when reweighting
  Vector y_delta;
  FidelityKind fidelity = FidelityKind::kl_poisson;
  PrimalFnSpec penalty = PrimalFnSpec::power(2.0);
  double alpha0 = 1.0;
  double rho = 0.5;  // geometric alpha decay, in (0, 1)
  int newton_steps = 1;
  SolverSchedule schedule;  // inner schedule, shared by all steps
  StopRule inner_stop;      // per-step budget; start is overridden per step
  double eps = 0.1;         // range-weight offset
  bool reweight_range = true;
  double step_safety = 0.96;  // fraction of the admissible step product when deriving
  Vector x0;                  // empty = origin
};

struct IrnmStep {
  int n = 0;             // linearization index: this step maps x_n to x_{n+1}
  double alpha = 0.0;    // alpha_n used by the inner solve
  double op_norm = 0.0;  // power-method estimate of ||T'[x_n]||
  double fit = 0.0;      // S(y_delta; T(x_{n+1}))
  SpaceDescriptor range_space;  // Y_n actually used (carries the weights)
  Vector x;                     // x_{n+1}
  SolveResult inner;
};

struct IrnmResult {
  std::vector<IrnmStep> steps;
  Vector x;  // last completed iterate
  bool aborted = false;
  std::string note;  // abort diagnostics; empty on a clean run
};

// Inner-solver divergence aborts the loop and returns the steps completed so
// far with `aborted` set; parameter and domain violations throw.
IrnmResult irnm_run(const IrnmSpec& spec);

}  // namespace banachpd
