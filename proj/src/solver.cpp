// SPDX-License-Identifier: Apache-2.0
#include "banachpd/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace banachpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clip(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

void check_box(const Vector& lo, const Vector& hi, Index n, const char* who) {
  if (lo.size() != n || hi.size() != n)
    throw std::invalid_argument(std::string(who) + ": box size mismatch");
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(lo[j]) || std::isnan(hi[j]) || lo[j] > hi[j] || lo[j] == kInf ||
        hi[j] == -kInf)
      throw std::invalid_argument(std::string(who) + ": empty or invalid box");
  }
}

double resolved_norm(const SaddleProblem& P) {
  if (P.T.norm_estimate > 0.0) return P.T.norm_estimate;
  return power_method(P.T, P.X(), P.Y()).value;
}

// C may relax the step bound up to the product of the convexity constants.
void check_relaxation(const SaddleProblem& P, double C) {
  if (!(C > 0.0) || C > 1.0) throw std::invalid_argument("run: C must lie in (0, 1]");
  const double floor = convexity_constant(P.X()) * convexity_constant(dual(P.Y()));
  if (C < floor * (1.0 - 1e-12))
    throw std::invalid_argument("run: C below the product of convexity constants");
}

struct RunConfig {
  double sigma0 = 0.0, tau0 = 0.0;
  std::function<double(double, double)> theta_of;         // (sigma_k, tau_k) -> theta_k
  std::function<void(double&, double&, double)> advance;  // post-step parameter update
  bool lyapunov = false;
  double gamma = 0.0, delta = 0.0, omega = kNaN;
};

SolveResult run_common(const SaddleProblem& P, const StopRule& stop, const RunConfig& rc) {
  P.validate_shapes();
  if (stop.max_iters < 0) throw std::invalid_argument("run: max_iters must be >= 0");
  const Index nx = P.X().dim(), ny = P.Y().dim();

  CpState s;
  if (stop.start) {
    s = *stop.start;
    if (s.x.size() != nx || s.p.size() != ny || s.xhat.size() != nx)
      throw std::invalid_argument("run: start state size mismatch");
  } else {
    s.x = Vector::Zero(nx);
    s.p = Vector::Zero(ny);
    s.xhat = s.x;
  }
  if (stop.x_ref && stop.x_ref->size() != nx)
    throw std::invalid_argument("run: x_ref size mismatch");

  const bool have_saddle = P.saddle_x.has_value() && P.saddle_p.has_value();
  const SpaceDescriptor Ys = dual(P.Y());

  double sigma = rc.sigma0, tau = rc.tau0;
  SolveResult R;
  R.omega = rc.omega;
  if (have_saddle) {
    R.delta0 = misfit(P, s.x, s.p, *P.saddle_x, *P.saddle_p, sigma, tau);
    if (rc.lyapunov)
      R.lyapunov0 = rc.delta * bregman(Ys, *P.saddle_p, s.p) +
                    rc.gamma * bregman(P.X(), *P.saddle_x, s.x);
  }
  if (stop.keep_trace) R.trace.reserve(static_cast<std::size_t>(std::min(stop.max_iters, 1 << 20)));

  Vector xsum = Vector::Zero(nx), psum = Vector::Zero(ny);
  Vector xprev(nx);
  const auto t0 = std::chrono::steady_clock::now();
  R.reason = StopReason::max_iters;

  for (int k = 1; k <= stop.max_iters; ++k) {
    const double theta = rc.theta_of(sigma, tau);
    xprev = s.x;
    try {
      s = cp_bs_step(P, s, sigma, tau, theta);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": " + e.what());
    }
    const double change = norm(P.X(), Vector(s.x - xprev)) / std::max(1.0, norm(P.X(), s.x));
    rc.advance(sigma, tau, theta);
    xsum += s.x;
    psum += s.p;
    R.iters = k;

    IterateRecord rec;
    rec.k = k;
    rec.sigma = sigma;  // schedule state paired with iterate k
    rec.tau = tau;
    rec.theta = theta;
    rec.primal_change = change;
    rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool finite = s.x.allFinite() && s.p.allFinite();
    if (have_saddle && finite) {
      rec.misfit = misfit(P, s.x, s.p, *P.saddle_x, *P.saddle_p, sigma, tau);
      if (rc.lyapunov)
        rec.lyapunov = (1.0 - rc.omega) * rc.delta * bregman(Ys, *P.saddle_p, s.p) +
                       rc.gamma * bregman(P.X(), *P.saddle_x, s.x);
    }
    if (stop.x_ref && finite) rec.err_ref = (s.x - *stop.x_ref).lpNorm<1>();
    if (stop.keep_trace) R.trace.push_back(rec);
    if (stop.on_iterate) stop.on_iterate(rec, s);

    // absolute floor keeps a zero initial misfit (start at the saddle) from tripping
    if (!finite || (have_saddle && rec.misfit > 1e3 * R.delta0 + 1e-9)) {
      R.reason = StopReason::diverged;
      break;
    }
    if (stop.x_ref && rec.err_ref <= stop.ref_tol) {
      R.reason = StopReason::reference_tol;
      break;
    }
    if (k >= 2 && change <= stop.stagnation_rtol) {
      R.reason = StopReason::stagnation;
      break;
    }
  }

  if (R.iters > 0) {
    R.x_ergodic = xsum / R.iters;
    R.p_ergodic = psum / R.iters;
  } else {
    R.x_ergodic = s.x;
    R.p_ergodic = s.p;
  }
  R.state = std::move(s);
  return R;
}

// min over {b1_lo <= x' <= b1_hi} of f(x') + <x', d>; +inf when the box misses
// dom f, -inf along directions of recession.
double primal_side_min(const PrimalResolvent& f, const Vector& d, const Vector& lo,
                       const Vector& hi) {
  const PrimalFnSpec& spec = f.fn();
  switch (spec.tag) {
    case PrimalFnSpec::Tag::power_norm: {
      const Vector z = box_min_powernorm(f.space(), spec.r, spec.scale, d, lo, hi);
      return f.value(z) + z.dot(d);
    }
    case PrimalFnSpec::Tag::l1: {
      double s = 0.0;
      for (Index j = 0; j < d.size(); ++j) {
        double best = kInf;
        if (lo[j] <= 0.0 && 0.0 <= hi[j]) best = 0.0;
        if (std::isfinite(lo[j]))
          best = std::min(best, spec.scale * std::abs(lo[j]) + d[j] * lo[j]);
        if (std::isfinite(hi[j]))
          best = std::min(best, spec.scale * std::abs(hi[j]) + d[j] * hi[j]);
        if ((!std::isfinite(lo[j]) && d[j] > spec.scale) ||
            (!std::isfinite(hi[j]) && d[j] < -spec.scale))
          return -kInf;
        s += best;
      }
      return s;
    }
    case PrimalFnSpec::Tag::box: {
      double s = 0.0;
      for (Index j = 0; j < d.size(); ++j) {
        const double a = std::max(lo[j], spec.lower[j]);
        const double b = std::min(hi[j], spec.upper[j]);
        if (a > b) return kInf;
        if (d[j] > 0.0)
          s += d[j] * a;
        else if (d[j] < 0.0)
          s += d[j] * b;
      }
      return s;
    }
    case PrimalFnSpec::Tag::zero: {
      double s = 0.0;
      for (Index j = 0; j < d.size(); ++j) {
        if (d[j] > 0.0)
          s += d[j] * lo[j];
        else if (d[j] < 0.0)
          s += d[j] * hi[j];
      }
      return s;
    }
  }
  throw std::logic_error("primal_side_min: unhandled penalty");
}

// max over {b2_lo <= p' <= b2_hi} of <v, p'> - g*(p'); -inf when the box misses
// dom g*, +inf along directions of recession.
double dual_side_max(const DualResolvent& g, const Vector& v, const Vector& lo, const Vector& hi) {
  const DataFidelitySpec& spec = g.fn();
  switch (spec.tag) {
    case DataFidelitySpec::Tag::quadratic_shift: {
      if (g.space().kind != SpaceKind::weighted_lr)
        throw std::invalid_argument("partial_gap: quadratic fidelity needs a weighted_lr range");
      const SpaceDescriptor Ys = dual(g.space());
      const Vector c = v - spec.y0;
      const Vector z = box_min_powernorm(Ys, 2.0, 1.0, Vector(-c), lo, hi);
      const double nz = norm(Ys, z);
      return c.dot(z) - 0.5 * nz * nz;
    }
    case DataFidelitySpec::Tag::kl_poisson: {
      const Vector& yd = spec.y_obs;
      const Vector b = spec.shift.size() ? spec.shift : Vector::Zero(v.size());
      bool infeasible = false, unbounded = false;
      double s = 0.0;
      for (Index j = 0; j < v.size(); ++j) {
        const double c = v[j] + b[j];
        double best;
        if (yd[j] > 0.0) {
          // concave smooth coordinate term c*p + y ln(1-p) + y(1 - ln y), p < 1
          auto val = [&](double p) {
            if (p >= 1.0) return -kInf;
            return c * p + yd[j] * (std::log1p(-p) - std::log(yd[j]) + 1.0);
          };
          best = -kInf;
          if (c > 0.0) best = std::max(best, val(clip(1.0 - yd[j] / c, lo[j], hi[j])));
          if (std::isfinite(lo[j]))
            best = std::max(best, val(lo[j]));
          else if (c <= 0.0)
            best = kInf;  // grows without bound as p -> -inf
          if (std::isfinite(hi[j])) best = std::max(best, val(hi[j]));
        } else {
          // zero-count coordinate: linear with domain p <= 1
          const double cap = std::min(hi[j], 1.0);
          if (lo[j] > cap) {
            infeasible = true;
            continue;
          }
          if (c > 0.0)
            best = c * cap;
          else if (c < 0.0)
            best = std::isfinite(lo[j]) ? c * lo[j] : kInf;
          else
            best = 0.0;
        }
        if (best == -kInf)
          infeasible = true;
        else if (best == kInf)
          unbounded = true;
        else
          s += best;
      }
      if (infeasible) return -kInf;  // empty feasible set beats unbounded coords
      if (unbounded) return kInf;
      return s;
    }
  }
  throw std::logic_error("dual_side_max: unhandled fidelity");
}

}  // namespace

void SaddleProblem::validate_shapes() const {
  if (!T.apply || !T.adjoint) throw std::invalid_argument("SaddleProblem: operator not set");
  if (T.domain.dim() != X().dim() || T.range.dim() != Y().dim())
    throw std::invalid_argument("SaddleProblem: operator/space dimension mismatch");
  if (saddle_x && saddle_x->size() != X().dim())
    throw std::invalid_argument("SaddleProblem: saddle_x size mismatch");
  if (saddle_p && saddle_p->size() != Y().dim())
    throw std::invalid_argument("SaddleProblem: saddle_p size mismatch");
}

CpState cp_bs_step(const SaddleProblem& P, const CpState& s, double sigma, double tau,
                   double theta) {
  if (!(sigma > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("cp_bs_step: steps must be positive");
  if (!(theta >= 0.0) || theta > 1.0)
    throw std::invalid_argument("cp_bs_step: theta outside [0, 1]");
  const Vector jp = duality_map(dual(P.Y()), s.p);
  CpState out;
  out.p = P.gstar.resolve(sigma, Vector(jp + sigma * P.T.apply(s.xhat)));
  const Vector jx = duality_map(P.X(), s.x);
  out.x = P.f.resolve(tau, Vector(jx - tau * P.T.adjoint(out.p)));
  out.xhat = out.x + theta * (out.x - s.x);
  return out;
}

SolveResult run_v1(const SaddleProblem& P, double sigma, double tau, double C,
                   const StopRule& stop) {
  if (!(sigma > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("run_v1: steps must be positive");
  check_relaxation(P, C);
  const double tn = resolved_norm(P);
  if (!(sigma * tau * tn * tn < C))
    throw std::invalid_argument("run_v1: sigma*tau*||T||^2 must stay below C");
  RunConfig rc;
  rc.sigma0 = sigma;
  rc.tau0 = tau;
  rc.theta_of = [](double, double) { return 1.0; };
  rc.advance = [](double&, double&, double) {};
  return run_common(P, stop, rc);
}

SolveResult run_v2(const SaddleProblem& P, double tau0, double sigma0, double gamma, double C,
                   const StopRule& stop) {
  if (!(tau0 > 0.0) || !(sigma0 > 0.0))
    throw std::invalid_argument("run_v2: steps must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("run_v2: gamma must be positive");
  if (gamma > P.f.convexity_modulus() * (1.0 + 1e-12))
    throw std::invalid_argument("run_v2: primal penalty does not certify modulus gamma");
  check_relaxation(P, C);
  const double tn = resolved_norm(P);
  if (!(sigma0 * tau0 * tn * tn <= C * (1.0 + 1e-12)))
    throw std::invalid_argument("run_v2: sigma0*tau0*||T||^2 must not exceed C");
  RunConfig rc;
  rc.sigma0 = sigma0;
  rc.tau0 = tau0;
  rc.theta_of = [gamma](double, double tau) { return 1.0 / std::sqrt(1.0 + gamma * tau); };
  // sigma recomputed from the invariant so sigma_k*tau_k never drifts
  const double prod = sigma0 * tau0;
  rc.advance = [prod](double& sigma, double& tau, double theta) {
    tau *= theta;
    sigma = prod / tau;
  };
  return run_common(P, stop, rc);
}

SolveResult run_v3(const SaddleProblem& P, double gamma, double delta, double mu, double theta,
                   double C, const StopRule& stop) {
  if (!(gamma > 0.0) || !(delta > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("run_v3: gamma, delta, mu must be positive");
  if (gamma > P.f.convexity_modulus() * (1.0 + 1e-12))
    throw std::invalid_argument("run_v3: primal penalty does not certify modulus gamma");
  if (delta > P.gstar.convexity_modulus() * (1.0 + 1e-12))
    throw std::invalid_argument("run_v3: fidelity conjugate does not certify modulus delta");
  check_relaxation(P, C);
  const double tn = resolved_norm(P);
  if (!(mu * tn <= std::sqrt(gamma * delta * C) * (1.0 + 1e-12)))
    throw std::invalid_argument("run_v3: mu*||T|| must not exceed sqrt(gamma*delta*C)");
  if (!(theta >= (1.0 - 1e-12) / (1.0 + mu)) || theta > 1.0)
    throw std::invalid_argument("run_v3: theta outside [1/(1+mu), 1]");
  RunConfig rc;
  rc.sigma0 = mu / delta;
  rc.tau0 = mu / gamma;
  rc.theta_of = [theta](double, double) { return theta; };
  rc.advance = [](double&, double&, double) {};
  rc.lyapunov = true;
  rc.gamma = gamma;
  rc.delta = delta;
  rc.omega = (1.0 + theta) / (2.0 + mu);
  return run_common(P, stop, rc);
}

SolveResult run_schedule(const SaddleProblem& P, const SolverSchedule& s, const StopRule& stop) {
  switch (s.variant) {
    case SolverSchedule::Variant::v1:
      return run_v1(P, s.sigma, s.tau, s.C, stop);
    case SolverSchedule::Variant::v2:
      return run_v2(P, s.tau, s.sigma, s.gamma, s.C, stop);
    case SolverSchedule::Variant::v3:
      return run_v3(P, s.gamma, s.delta, s.mu, s.theta, s.C, stop);
  }
  throw std::logic_error("run_schedule: unhandled variant");
}

SolverSchedule complete_schedule(SolverSchedule s, double op_norm, double safety) {
  if (!(safety > 0.0) || safety >= 1.0)
    throw std::invalid_argument("complete_schedule: safety must lie in (0, 1)");
  if (s.variant == SolverSchedule::Variant::v3) {
    if (s.mu > 0.0) return s;
    if (!(s.gamma > 0.0) || !(s.delta > 0.0))
      throw std::invalid_argument("complete_schedule: v3 needs gamma, delta > 0");
    if (!(op_norm > 0.0))
      throw std::invalid_argument("complete_schedule: zero operator norm, cannot derive mu");
    s.mu = safety * std::sqrt(s.gamma * s.delta * s.C) / op_norm;
    return s;
  }
  if (s.sigma > 0.0 && s.tau > 0.0) return s;
  if (!(op_norm > 0.0))
    throw std::invalid_argument("complete_schedule: zero operator norm, cannot derive steps");
  const double product = safety * s.C / (op_norm * op_norm);
  if (s.sigma > 0.0) {
    s.tau = product / s.sigma;
  } else if (s.tau > 0.0) {
    s.sigma = product / s.tau;
  } else {
    s.tau = 1.0 / op_norm;
    s.sigma = product / s.tau;
  }
  return s;
}

double misfit(const SaddleProblem& P, const Vector& x, const Vector& p, const Vector& x_ref,
              const Vector& p_ref, double sigma, double tau) {
  if (!(sigma > 0.0) || !(tau > 0.0)) throw std::invalid_argument("misfit: steps must be positive");
  return bregman(dual(P.Y()), p_ref, p) / sigma + bregman(P.X(), x_ref, x) / tau;
}

double partial_gap(const SaddleProblem& P, const Vector& x, const Vector& p, const Vector& b1_lo,
                   const Vector& b1_hi, const Vector& b2_lo, const Vector& b2_hi) {
  P.validate_shapes();
  if (x.size() != P.X().dim() || p.size() != P.Y().dim())
    throw std::invalid_argument("partial_gap: point size mismatch");
  check_box(b1_lo, b1_hi, x.size(), "partial_gap");
  check_box(b2_lo, b2_hi, p.size(), "partial_gap");
  const double term1 = P.f.value(x) + dual_side_max(P.gstar, P.T.apply(x), b2_lo, b2_hi);
  const double term2 =
      -P.gstar.conjugate_value(p) + primal_side_min(P.f, P.T.adjoint(p), b1_lo, b1_hi);
  return term1 - term2;
}

double box_sup_bregman(const SpaceDescriptor& Z, const Vector& z0, const Vector& lo,
                       const Vector& hi) {
  validate(Z);
  const Index n = Z.dim();
  if (z0.size() != n) throw std::invalid_argument("box_sup_bregman: size mismatch");
  check_box(lo, hi, n, "box_sup_bregman");
  if (n > 20) throw std::invalid_argument("box_sup_bregman: dimension capped at 20");
  for (Index j = 0; j < n; ++j)
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]))
      throw std::invalid_argument("box_sup_bregman: box must be finite");
  double best = 0.0;
  Vector v(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (Index j = 0; j < n; ++j) v[j] = ((mask >> j) & 1u) ? hi[j] : lo[j];
    best = std::max(best, bregman(Z, v, z0));
  }
  return best;
}

}  // namespace banachpd
