// SPDX-License-Identifier: Apache-2.0
#include "banachpd/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include "banachpd/fourier.hpp"

namespace banachpd {

namespace {

void check_dim(const SpaceDescriptor& X, const Vector& v, const char* where) {
  if (v.size() != X.dim())
    throw std::invalid_argument(std::string(where) + ": vector size " +
                                std::to_string(v.size()) + " != space dim " +
                                std::to_string(X.dim()));
}

// |t|^(r-1) sign(t) componentwise.
Vector signed_pow(const Vector& v, double e) {
  Vector out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v[j]);
    out[j] = a == 0.0 ? 0.0 : std::copysign(std::pow(a, e), v[j]);
  }
  return out;
}

double lr_norm(double r, const Vector& w, const Vector& v) {
  if (r == 2.0) {
    if (w.size() == 0) return v.norm();
    return std::sqrt(w.dot(v.cwiseAbs2()));
  }
  double acc = 0.0;
  for (Index j = 0; j < v.size(); ++j) {
    const double wj = w.size() == 0 ? 1.0 : w[j];
    acc += wj * std::pow(std::abs(v[j]), r);
  }
  return std::pow(acc, 1.0 / r);
}

// J_{q, l^r_W}(v) = W |v|^(r-1) sign(v) * ||v||^(q-r).
Vector lr_duality_map(double r, const Vector& w, double q, const Vector& v) {
  if (r == 2.0) {
    Vector out = w.size() == 0 ? v : Vector(w.cwiseProduct(v));
    if (q != 2.0) {
      const double nrm = lr_norm(r, w, v);
      if (nrm == 0.0) return Vector::Zero(v.size());
      out *= std::pow(nrm, q - 2.0);
    }
    return out;
  }
  const double nrm = lr_norm(r, w, v);
  if (nrm == 0.0) return Vector::Zero(v.size());
  Vector out = signed_pow(v, r - 1.0) * std::pow(nrm, q - r);
  if (w.size() != 0) out = out.cwiseProduct(w);
  return out;
}

}  // namespace

Index SpaceDescriptor::dim() const {
  if (kind == SpaceKind::weighted_lr) return weights.size();
  Index total = 1;
  for (int a = 0; a < dims; ++a) total *= n_axis;
  return total;
}

SpaceDescriptor make_weighted_lr(double r, Vector weights) {
  SpaceDescriptor X;
  X.kind = SpaceKind::weighted_lr;
  X.r = r;
  X.weights = std::move(weights);
  validate(X);
  return X;
}

SpaceDescriptor make_lr(double r, Index n) { return make_weighted_lr(r, Vector::Ones(n)); }

SpaceDescriptor make_sobolev(double r, double s, int dims, Index n_axis, double grid_scale) {
  SpaceDescriptor X;
  X.kind = SpaceKind::sobolev_periodic;
  X.r = r;
  X.s = s;
  X.dims = dims;
  X.n_axis = n_axis;
  X.grid_scale = grid_scale;
  validate(X);
  return X;
}

void validate(const SpaceDescriptor& X) {
  if (!(X.r > 1.0) || !std::isfinite(X.r))
    throw std::invalid_argument("space: exponent r must lie in (1, inf)");
  if (X.kind == SpaceKind::weighted_lr) {
    if (X.weights.size() == 0) throw std::invalid_argument("space: empty weight vector");
    if (!(X.weights.minCoeff() > 0.0))
      throw std::invalid_argument("space: weights must be strictly positive");
  } else {
    if (X.dims < 1) throw std::invalid_argument("space: dims must be >= 1");
    if (X.n_axis < 2 || X.n_axis % 2 != 0)
      throw std::invalid_argument("space: n_axis must be even and >= 2");
    if (!(X.grid_scale > 0.0)) throw std::invalid_argument("space: grid_scale must be > 0");
  }
}

double conjugate_exponent(double r) { return r / (r - 1.0); }

SpaceDescriptor dual(const SpaceDescriptor& X) {
  SpaceDescriptor D = X;
  const double rs = conjugate_exponent(X.r);
  D.r = rs;
  if (X.kind == SpaceKind::weighted_lr) {
    // Dual weights W^(-r*/r): makes ||J(v)||_* = ||v|| an exact identity.
    D.weights = X.weights.array().pow(-rs / X.r).matrix();
  } else {
    D.s = -X.s;
  }
  return D;
}

double norm(const SpaceDescriptor& X, const Vector& v) {
  check_dim(X, v, "norm");
  if (X.kind == SpaceKind::weighted_lr) return lr_norm(X.r, X.weights, v);
  return lr_norm(X.r, Vector(), bessel_potential(X, X.s, v));
}

Vector duality_map(const SpaceDescriptor& X, double q, const Vector& v) {
  check_dim(X, v, "duality_map");
  if (!(q > 1.0)) throw std::invalid_argument("duality_map: gauge exponent q must be > 1");
  if (X.kind == SpaceKind::weighted_lr) return lr_duality_map(X.r, X.weights, q, v);
  // Chain rule for ||v||_X = ||Lambda_s v||_{l^r} with Lambda_s symmetric:
  // J_{q,X} = Lambda_s . J_{q,l^r} . Lambda_s, mapping onto the (-s, r*) grid.
  Vector inner = bessel_potential(X, X.s, v);
  return bessel_potential(X, X.s, lr_duality_map(X.r, Vector(), q, inner));
}

double bregman(const SpaceDescriptor& X, const Vector& u, const Vector& x) {
  check_dim(X, u, "bregman");
  check_dim(X, x, "bregman");
  const double nu = norm(X, u);
  const double nx = norm(X, x);
  return 0.5 * nu * nu - 0.5 * nx * nx - (u - x).dot(duality_map(X, 2.0, x));
}

double convexity_constant(const SpaceDescriptor& X) {
  if (X.r == 2.0) return 1.0;
  if (X.r > 2.0)
    throw std::invalid_argument("convexity_constant: r > 2, space is not 2-convex");
  return 0.99 * (X.r - 1.0);
}

Vector bessel_potential(const SpaceDescriptor& X, double s, const Vector& v) {
  if (X.kind != SpaceKind::sobolev_periodic)
    throw std::invalid_argument("bessel_potential: space is not a periodic grid");
  check_dim(X, v, "bessel_potential");
  if (s == 0.0) return v;

  const Index n = X.n_axis;
  CVector work = fourier::dft(v.cast<Complex>(), n, X.dims);

  // (1 + |xi|^2)^(-s/2) on the flat row-major grid, xi = int_freq / a.
  Vector axis_freq_sq(n);
  for (Index k = 0; k < n; ++k) {
    const double f = static_cast<double>(fourier::freq_of_bin(k, n)) / X.grid_scale;
    axis_freq_sq[k] = f * f;
  }
  for (Index flat = 0; flat < work.size(); ++flat) {
    Index rest = flat;
    double fsq = 0.0;
    for (int a = X.dims - 1; a >= 0; --a) {
      fsq += axis_freq_sq[rest % n];
      rest /= n;
    }
    work[flat] *= std::pow(1.0 + fsq, -0.5 * s);
  }
  return fourier::real_part_checked(fourier::idft(work, n, X.dims));
}

}  // namespace banachpd
