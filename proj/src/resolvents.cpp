// SPDX-License-Identifier: Apache-2.0
#include "banachpd/resolvents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace banachpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_dim(const SpaceDescriptor& X, const Vector& v, const char* who) {
  if (v.size() != X.dim()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

void require_separable(const SpaceDescriptor& X, const char* who) {
  if (X.kind != SpaceKind::weighted_lr)
    throw std::invalid_argument(std::string(who) + ": requires a componentwise (weighted_lr) space");
}

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) {
    const double m = std::abs(a) - t;
    return m > 0.0 ? (a < 0.0 ? -m : m) : 0.0;
  });
}

double clip(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

void check_box(const Vector& lower, const Vector& upper, Index n, const char* who) {
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument(std::string(who) + ": box dimension mismatch");
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
      throw std::invalid_argument(std::string(who) + ": empty or invalid box");
  }
}

}  // namespace

PrimalFnSpec PrimalFnSpec::power(double r, double scale) {
  if (!(r > 1.0) || !(scale > 0.0)) throw std::invalid_argument("power penalty: need r > 1, scale > 0");
  PrimalFnSpec s;
  s.tag = Tag::power_norm;
  s.r = r;
  s.scale = scale;
  return s;
}

PrimalFnSpec PrimalFnSpec::l1(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("l1 penalty: need scale > 0");
  PrimalFnSpec s;
  s.tag = Tag::l1;
  s.scale = scale;
  return s;
}

PrimalFnSpec PrimalFnSpec::box(Vector lower, Vector upper) {
  check_box(lower, upper, lower.size(), "box penalty");
  PrimalFnSpec s;
  s.tag = Tag::box;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

PrimalFnSpec PrimalFnSpec::zero() { return PrimalFnSpec{}; }

DataFidelitySpec DataFidelitySpec::quadratic(Vector y0) {
  DataFidelitySpec s;
  s.tag = Tag::quadratic_shift;
  s.y0 = std::move(y0);
  return s;
}

DataFidelitySpec DataFidelitySpec::kl(Vector y_obs, Vector weights, double offset, Vector shift) {
  if ((y_obs.array() < 0.0).any()) throw std::invalid_argument("kl fidelity: observations must be >= 0");
  if (weights.size() != y_obs.size() || (weights.array() <= 0.0).any())
    throw std::invalid_argument("kl fidelity: weights must be positive and match the data");
  if (shift.size() != 0 && shift.size() != y_obs.size())
    throw std::invalid_argument("kl fidelity: shift dimension mismatch");
  if (offset < 0.0) throw std::invalid_argument("kl fidelity: offset must be >= 0");
  DataFidelitySpec s;
  s.tag = Tag::kl_poisson;
  s.y_obs = std::move(y_obs);
  s.weights = std::move(weights);
  s.offset = offset;
  s.shift = std::move(shift);
  return s;
}

double power_root(double ts, double r, double target) {
  if (!(ts >= 0.0) || !(r > 1.0) || !(target >= 0.0))
    throw std::invalid_argument("power_root: need ts >= 0, r > 1, target >= 0");
  if (target == 0.0 || ts == 0.0) return target == 0.0 ? 0.0 : target;
  const double tol = 1e-12 * (1.0 + target);
  double lo = 0.0, hi = target, a = target;
  for (int it = 0; it < 100; ++it) {
    const double g = ts * std::pow(a, r - 1.0) + a - target;
    if (std::abs(g) <= tol) return a;
    if (g > 0.0)
      hi = a;
    else
      lo = a;
    const double gp = ts * (r - 1.0) * std::pow(a, r - 2.0) + 1.0;
    double next = a - g / gp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    a = next;
  }
  return a;
}

Vector res_power_norm(const SpaceDescriptor& X, double r_f, double tau, const Vector& xstar,
                      double scale) {
  check_same_dim(X, xstar, "res_power_norm");
  if (!(tau > 0.0) || !(r_f > 1.0) || !(scale > 0.0))
    throw std::invalid_argument("res_power_norm: need tau > 0, r > 1, scale > 0");
  const double ts = tau * scale;
  if (r_f == 2.0) return Vector(duality_map(dual(X), xstar) / (ts + 1.0));
  const double nx = norm(dual(X), xstar);
  if (nx == 0.0) return Vector::Zero(xstar.size());
  const double a = power_root(ts, r_f, nx);
  return Vector(duality_map(dual(X), xstar) / (ts * std::pow(a, r_f - 2.0) + 1.0));
}

Vector res_l1(const SpaceDescriptor& X, double tau, const Vector& xstar, double scale) {
  check_same_dim(X, xstar, "res_l1");
  require_separable(X, "res_l1");
  if (!(tau > 0.0) || !(scale > 0.0)) throw std::invalid_argument("res_l1: need tau > 0, scale > 0");
  return duality_map(dual(X), soft_threshold(xstar, tau * scale));
}

Vector box_min_powernorm(const SpaceDescriptor& X, double r_f, double scale, const Vector& linear,
                         const Vector& lower, const Vector& upper) {
  check_same_dim(X, linear, "box_min_powernorm");
  require_separable(X, "box_min_powernorm");
  check_box(lower, upper, linear.size(), "box_min_powernorm");
  const double r = X.r;
  if (!(scale > 0.0) || !(r_f > 1.0))
    throw std::invalid_argument("box_min_powernorm: need scale > 0 and r_f > 1");
  const Index n = linear.size();
  const Vector w = X.weights.size() ? X.weights : Vector::Ones(n);

  // coordinate solution at a given norm level nu (ignored when r_f == r)
  auto at_level = [&](double nu) {
    Vector z(n);
    const double lvl = r_f == r ? 1.0 : std::pow(nu, r_f - r);
    for (Index j = 0; j < n; ++j) {
      double u = 0.0;
      if (linear[j] != 0.0) {
        u = std::pow(std::abs(linear[j]) / (scale * w[j] * lvl), 1.0 / (r - 1.0));
        if (std::isnan(u)) u = kInf;
        if (linear[j] > 0.0) u = -u;
      }
      z[j] = clip(u, lower[j], upper[j]);
    }
    return z;
  };

  if (r_f == r || linear.isZero(0.0)) {
    Vector z = at_level(1.0);
    if (linear.isZero(0.0))
      for (Index j = 0; j < n; ++j) z[j] = clip(0.0, lower[j], upper[j]);
    return z;
  }

  // nu -> ||z(nu)||_X - nu is strictly decreasing for r_f >= X.r and in any
  // case crosses zero at most once: a positive root satisfies the full
  // optimality system of a strictly convex problem, so two roots would name
  // the same minimizer and hence the same norm.  Bracket then bisect.
  auto excess = [&](double nu) { return norm(X, at_level(nu)) - nu; };
  double hi = std::max(1.0, norm(dual(X), linear));
  int guard = 0;
  while (excess(hi) > 0.0 && guard++ < 400) hi *= 8.0;
  double lo = 0.0;
  double nu = hi;
  for (int it = 0; it < 200; ++it) {
    nu = 0.5 * (lo + hi);
    if (nu == lo || nu == hi) break;
    (excess(nu) > 0.0 ? lo : hi) = nu;
  }
  return at_level(nu);
}

Vector res_box(const SpaceDescriptor& X, const Vector& lower, const Vector& upper,
               const Vector& xstar) {
  return box_min_powernorm(X, 2.0, 1.0, Vector(-xstar), lower, upper);
}

Vector res_zero(const SpaceDescriptor& X, const Vector& xstar) {
  check_same_dim(X, xstar, "res_zero");
  return duality_map(dual(X), xstar);
}

Vector moreau_gstar_resolvent(const SpaceDescriptor& Y, double sigma, const InnerResolvent& inner,
                              const Vector& y) {
  check_same_dim(Y, y, "moreau_gstar_resolvent");
  if (!(sigma > 0.0)) throw std::invalid_argument("moreau_gstar_resolvent: need sigma > 0");
  return duality_map(Y, Vector(y - sigma * inner(sigma, y)));
}

Vector res_quadratic_data(const SpaceDescriptor& Y, double sigma, const Vector& y0,
                          const Vector& y) {
  check_same_dim(Y, y, "res_quadratic_data");
  if (y0.size() != y.size()) throw std::invalid_argument("res_quadratic_data: data dimension mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("res_quadratic_data: need sigma > 0");
  return duality_map(Y, Vector((y - sigma * y0) / (sigma + 1.0)));
}

Vector res_kl_inner_shifted(double sigma, const Vector& y_obs, const Vector& weights,
                            const Vector& shift, const Vector& y) {
  if (!(sigma > 0.0)) throw std::invalid_argument("res_kl_inner: need sigma > 0");
  const Index n = y.size();
  if (y_obs.size() != n || weights.size() != n || (shift.size() != 0 && shift.size() != n))
    throw std::invalid_argument("res_kl_inner: dimension mismatch");
  Vector z(n);
  for (Index j = 0; j < n; ++j) {
    const double b = shift.size() ? shift[j] : 0.0;
    const double a = y[j] + sigma * b - 1.0 / weights[j];
    const double c = y_obs[j] / weights[j];
    double v;
    if (c == 0.0)
      v = std::max(a, 0.0) / sigma;
    else if (a >= 0.0)
      v = (a + std::sqrt(a * a + 4.0 * sigma * c)) / (2.0 * sigma);
    else
      v = 2.0 * c / (std::sqrt(a * a + 4.0 * sigma * c) - a);  // cancellation-free branch
    z[j] = v - b;
  }
  return z;
}

Vector res_kl_inner(double sigma, const Vector& y_obs, const Vector& weights, const Vector& y) {
  return res_kl_inner_shifted(sigma, y_obs, weights, Vector(), y);
}

PrimalResolvent::PrimalResolvent(SpaceDescriptor X, PrimalFnSpec fn)
    : X_(std::move(X)), fn_(std::move(fn)) {
  validate(X_);
  switch (fn_.tag) {
    case PrimalFnSpec::Tag::power_norm:
      if (fn_.r == 2.0) gamma_ = fn_.scale;
      break;
    case PrimalFnSpec::Tag::l1:
    case PrimalFnSpec::Tag::box:
      require_separable(X_, "PrimalResolvent");
      if (fn_.tag == PrimalFnSpec::Tag::box) check_box(fn_.lower, fn_.upper, X_.dim(), "PrimalResolvent");
      break;
    case PrimalFnSpec::Tag::zero:
      break;
  }
}

Vector PrimalResolvent::resolve(double tau, const Vector& xstar) const {
  switch (fn_.tag) {
    case PrimalFnSpec::Tag::power_norm:
      return res_power_norm(X_, fn_.r, tau, xstar, fn_.scale);
    case PrimalFnSpec::Tag::l1:
      return res_l1(X_, tau, xstar, fn_.scale);
    case PrimalFnSpec::Tag::box:
      return res_box(X_, fn_.lower, fn_.upper, xstar);
    case PrimalFnSpec::Tag::zero:
      return res_zero(X_, xstar);
  }
  throw std::logic_error("PrimalResolvent: unhandled tag");
}

double PrimalResolvent::value(const Vector& x) const {
  check_same_dim(X_, x, "PrimalResolvent::value");
  switch (fn_.tag) {
    case PrimalFnSpec::Tag::power_norm:
      return fn_.scale / fn_.r * std::pow(norm(X_, x), fn_.r);
    case PrimalFnSpec::Tag::l1:
      return fn_.scale * x.lpNorm<1>();
    case PrimalFnSpec::Tag::box: {
      for (Index j = 0; j < x.size(); ++j) {
        const double slack = 1e-12 * (1.0 + std::abs(x[j]));
        if (x[j] < fn_.lower[j] - slack || x[j] > fn_.upper[j] + slack) return kInf;
      }
      return 0.0;
    }
    case PrimalFnSpec::Tag::zero:
      return 0.0;
  }
  throw std::logic_error("PrimalResolvent: unhandled tag");
}

DualResolvent::DualResolvent(SpaceDescriptor Y, DataFidelitySpec fid)
    : Y_(std::move(Y)), fid_(std::move(fid)) {
  validate(Y_);
  if (fid_.tag == DataFidelitySpec::Tag::quadratic_shift) {
    if (fid_.y0.size() != Y_.dim()) throw std::invalid_argument("DualResolvent: data dimension mismatch");
    delta_ = 1.0;
  } else {
    if (Y_.kind != SpaceKind::weighted_lr || Y_.r != 2.0)
      throw std::invalid_argument("DualResolvent: kl fidelity requires Y = weighted l2");
    if (fid_.y_obs.size() != Y_.dim()) throw std::invalid_argument("DualResolvent: data dimension mismatch");
    kl_weights_ = Y_.weights.size() ? Y_.weights : Vector(Vector::Ones(Y_.dim()));
    if ((kl_weights_ - fid_.weights).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("DualResolvent: fidelity weights disagree with the space weights");
  }
}

Vector DualResolvent::resolve(double sigma, const Vector& y) const {
  if (fid_.tag == DataFidelitySpec::Tag::quadratic_shift)
    return res_quadratic_data(Y_, sigma, fid_.y0, y);
  check_same_dim(Y_, y, "DualResolvent::resolve");
  if (!(sigma > 0.0)) throw std::invalid_argument("DualResolvent: need sigma > 0");
  Vector z = res_kl_inner_shifted(sigma, fid_.y_obs, kl_weights_, fid_.shift, y);
  return duality_map(Y_, Vector(y - sigma * z));
}

double DualResolvent::value(const Vector& v) const {
  check_same_dim(Y_, v, "DualResolvent::value");
  if (fid_.tag == DataFidelitySpec::Tag::quadratic_shift) {
    const double d = norm(Y_, Vector(v - fid_.y0));
    return 0.5 * d * d;
  }
  double s = 0.0;
  for (Index j = 0; j < v.size(); ++j) {
    const double t = v[j] + (fid_.shift.size() ? fid_.shift[j] : 0.0);
    if (t < 0.0) return kInf;
    if (fid_.y_obs[j] > 0.0) {
      if (t == 0.0) return kInf;
      s += t - fid_.y_obs[j] * std::log(t);
    } else {
      s += t;
    }
  }
  return s;
}

double DualResolvent::conjugate_value(const Vector& p) const {
  if (p.size() != Y_.dim()) throw std::invalid_argument("DualResolvent::conjugate_value: dimension mismatch");
  if (fid_.tag == DataFidelitySpec::Tag::quadratic_shift) {
    const double d = norm(dual(Y_), p);
    return 0.5 * d * d + p.dot(fid_.y0);
  }
  double s = 0.0;
  for (Index j = 0; j < p.size(); ++j) {
    if (fid_.y_obs[j] > 0.0) {
      if (p[j] >= 1.0) return kInf;
      s += fid_.y_obs[j] * (std::log(fid_.y_obs[j]) - std::log1p(-p[j]) - 1.0);
    } else if (p[j] > 1.0) {
      return kInf;
    }
  }
  if (fid_.shift.size()) s -= fid_.shift.dot(p);
  return s;
}

}  // namespace banachpd
