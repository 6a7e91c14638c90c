// SPDX-License-Identifier: Apache-2.0
#include "banachpd/irnm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace banachpd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_penalty(const PrimalFnSpec& pen) {
  if (pen.tag != PrimalFnSpec::Tag::power_norm && pen.tag != PrimalFnSpec::Tag::l1)
    throw std::invalid_argument("tikhonov: penalty must be power_norm or l1");
}

// sigma (v1/v2) and mu (v3) left at 0 are derived from the measured operator
// norm so that the schedule premise holds with margin step_safety.
SolverSchedule resolve_schedule(const SolverSchedule& in, double step_safety, double tn) {
  return complete_schedule(in, tn, step_safety);
}

}  // namespace

double data_misfit(FidelityKind kind, const Vector& y_delta, const Vector& v) {
  if (v.size() != y_delta.size()) throw std::invalid_argument("data_misfit: dimension mismatch");
  if (kind == FidelityKind::quadratic) return 0.5 * (v - y_delta).squaredNorm();
  double s = 0.0;
  for (Index j = 0; j < v.size(); ++j) {
    if (v[j] < 0.0) return kInf;
    if (y_delta[j] > 0.0) {
      if (v[j] == 0.0) return kInf;
      s += v[j] - y_delta[j] * std::log(v[j]);
    } else {
      s += v[j];
    }
  }
  return s;
}

SaddleProblem assemble_tikhonov(const TikhonovSpec& spec) {
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("tikhonov: need alpha > 0");
  check_penalty(spec.penalty);
  PrimalFnSpec pen = spec.penalty;
  pen.scale *= spec.alpha;
  DataFidelitySpec fid = spec.fidelity;
  if (fid.tag == DataFidelitySpec::Tag::kl_poisson && fid.weights.size() == 0)
    fid.weights = spec.Y.weights.size() ? spec.Y.weights : Vector(Vector::Ones(spec.Y.dim()));
  LinearOp T = spec.T;
  T.domain = spec.X;
  T.range = spec.Y;
  SaddleProblem P{std::move(T), PrimalResolvent(spec.X, std::move(pen)),
                  DualResolvent(spec.Y, std::move(fid)), std::nullopt, std::nullopt};
  P.validate_shapes();
  return P;
}

CpState warm_start(const SaddleProblem& P, std::optional<Vector> x0) {
  CpState s;
  s.x = x0 ? std::move(*x0) : Vector(Vector::Zero(P.X().dim()));
  if (s.x.size() != P.X().dim()) throw std::invalid_argument("warm_start: x0 dimension mismatch");
  const Vector pred = P.T.apply(s.x);
  const DataFidelitySpec& fid = P.gstar.fn();
  if (fid.tag == DataFidelitySpec::Tag::quadratic_shift) {
    s.p = duality_map(P.Y(), Vector(pred - fid.y0));
  } else {
    // componentwise fidelity subgradient at the predicted data; a boundary
    // hit with a positive count has an empty subdifferential there, so the
    // inclusion is dropped wholesale
    const Index m = P.Y().dim();
    Vector p(m);
    bool interior = true;
    for (Index j = 0; j < m && interior; ++j) {
      const double t = pred[j] + (fid.shift.size() ? fid.shift[j] : 0.0);
      if (fid.y_obs[j] > 0.0) {
        if (t > 0.0)
          p[j] = 1.0 - fid.y_obs[j] / t;
        else
          interior = false;
      } else {
        if (t >= 0.0)
          p[j] = 1.0;
        else
          interior = false;
      }
    }
    s.p = interior ? std::move(p) : Vector(Vector::Zero(m));
  }
  s.xhat = s.x;
  return s;
}

TikhonovResult tikhonov_solve(const TikhonovSpec& spec) {
  SaddleProblem P = assemble_tikhonov(spec);
  StopRule stop = spec.stop;
  if (!stop.start) stop.start = warm_start(P);
  SolveResult r = run_schedule(P, spec.schedule, stop);
  Vector x = r.state.x;
  return TikhonovResult{std::move(P), std::move(r), std::move(x)};
}

IrnmResult irnm_run(const IrnmSpec& spec) {
  if (!(spec.alpha0 > 0.0)) throw std::invalid_argument("irnm: need alpha0 > 0");
  if (!(spec.rho > 0.0 && spec.rho < 1.0))
    throw std::invalid_argument("irnm: rho must lie in (0, 1)");
  if (spec.newton_steps < 1) throw std::invalid_argument("irnm: need newton_steps >= 1");
  if (!(spec.eps >= 0.0)) throw std::invalid_argument("irnm: need eps >= 0");
  if (!(spec.step_safety > 0.0 && spec.step_safety < 1.0))
    throw std::invalid_argument("irnm: step_safety must lie in (0, 1)");
  if (spec.y_delta.size() != spec.Y.dim())
    throw std::invalid_argument("irnm: data dimension mismatch");

  IrnmResult out;
  out.x = spec.x0.size() ? spec.x0 : Vector(Vector::Zero(spec.X.dim()));
  if (out.x.size() != spec.X.dim()) throw std::invalid_argument("irnm: x0 dimension mismatch");
  out.steps.reserve(static_cast<std::size_t>(spec.newton_steps));
  double alpha = spec.alpha0;

  for (int n = 0; n < spec.newton_steps; ++n) {
    const Vector pred = spec.T.apply(out.x);
    SpaceDescriptor Yn = spec.Y;
    if (spec.reweight_range) {
      if (!((pred.array() + spec.eps) > 0.0).all())
        throw std::runtime_error("irnm: range weights need T(x_n) + eps > 0 at step " +
                                 std::to_string(n));
      Yn = make_weighted_lr(2.0, (pred.array() + spec.eps).inverse().matrix());
    }

    TikhonovSpec inner;
    inner.T = spec.T.derivative_at(out.x);
    inner.X = spec.X;
    inner.Y = Yn;
    const PowerMethodResult pm = power_method(inner.T, spec.X, Yn);
    inner.T.norm_estimate = pm.value;
    const Vector lin = inner.T.apply(out.x);
    if (spec.fidelity == FidelityKind::quadratic)
      inner.fidelity = DataFidelitySpec::quadratic(spec.y_delta - pred + lin);
    else
      inner.fidelity = DataFidelitySpec::kl(
          spec.y_delta, Yn.weights.size() ? Yn.weights : Vector(Vector::Ones(Yn.dim())), 0.0,
          Vector(pred - lin));
    inner.penalty = spec.penalty;
    inner.alpha = alpha;
    inner.schedule = resolve_schedule(spec.schedule, spec.step_safety, pm.value);
    inner.stop = spec.inner_stop;

    SaddleProblem P = assemble_tikhonov(inner);
    inner.stop.start = warm_start(P, out.x);
    SolveResult r = run_schedule(P, inner.schedule, inner.stop);

    IrnmStep step;
    step.n = n;
    step.alpha = alpha;
    step.op_norm = pm.value;
    step.range_space = Yn;
    step.x = r.state.x;
    step.fit = step.x.allFinite()
                   ? data_misfit(spec.fidelity, spec.y_delta, spec.T.apply(step.x))
                   : kInf;
    const bool diverged = r.reason == StopReason::diverged;
    step.inner = std::move(r);
    out.steps.push_back(std::move(step));
    if (diverged) {
      out.aborted = true;
      out.note = "inner solve diverged at newton step " + std::to_string(n);
      return out;  // out.x still holds the last completed iterate
    }
    out.x = out.steps.back().x;
    alpha *= spec.rho;
  }
  return out;
}

}  // namespace banachpd
