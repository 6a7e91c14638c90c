// SPDX-License-Identifier: Apache-2.0
#include "banachpd/operators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace banachpd {

LinearOp matrix_op(Matrix A) {
  SpaceDescriptor X = make_lr(2.0, A.cols());
  SpaceDescriptor Y = make_lr(2.0, A.rows());
  return matrix_op(std::move(A), std::move(X), std::move(Y));
}

LinearOp matrix_op(Matrix A, SpaceDescriptor X, SpaceDescriptor Y) {
  if (X.dim() != A.cols() || Y.dim() != A.rows())
    throw std::invalid_argument("matrix_op: descriptor/matrix shape mismatch");
  LinearOp op;
  op.domain = std::move(X);
  op.range = std::move(Y);
  Matrix At = A.transpose();
  op.apply = [A = std::move(A)](const Vector& x) { return Vector(A * x); };
  op.adjoint = [At = std::move(At)](const Vector& q) { return Vector(At * q); };
  return op;
}

LinearOp conv_operator(double kernel_decay, Index n_x, Index n_y, bool unit_quadrature) {
  if (n_x < 2 || n_y < 2) throw std::invalid_argument("conv_operator: need n_x, n_y >= 2");
  const double h = 1.0 / static_cast<double>(n_x - 1);
  Matrix A(n_y, n_x);
  for (Index i = 0; i < n_y; ++i) {
    const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n_y - 1);
    for (Index j = 0; j < n_x; ++j) {
      const double s = -0.5 + static_cast<double>(j) * h;
      const double w = unit_quadrature ? 1.0 : (j == 0 || j == n_x - 1 ? 0.5 * h : h);
      A(i, j) = std::exp(-kernel_decay * std::abs(t - s)) * w;
    }
  }
  return matrix_op(std::move(A));
}

PowerMethodResult power_method(const LinearOp& T, const SpaceDescriptor& X,
                               const SpaceDescriptor& Y, int max_iters, double tol,
                               std::uint64_t seed) {
  validate(X);
  validate(Y);
  if (!(tol > 0.0) || max_iters < 1) throw std::invalid_argument("power_method: bad parameters");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto fresh = [&] {
    Vector v(X.dim());
    for (Index j = 0; j < v.size(); ++j) v[j] = U(gen);
    return v;
  };

  int restarts = 0;
  Vector x = fresh();
  double nx = norm(X, x);
  while (nx == 0.0 && restarts++ < 5) {
    x = fresh();
    nx = norm(X, x);
  }
  if (nx == 0.0) throw std::runtime_error("power_method: could not seed a nonzero iterate");
  x /= nx;

  PowerMethodResult res;
  double est = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    res.iters = it + 1;
    Vector y = T.apply(x);
    const double ny = norm(Y, y);
    if (ny == 0.0) {
      if (++restarts > 5) throw std::runtime_error("power_method: iterates keep collapsing to 0");
      x = fresh();
      x /= norm(X, x);
      continue;
    }
    const double prev = est;
    est = ny;
    res.x = x;
    if (it > 0 && std::abs(est - prev) <= tol * std::max(1.0, est)) {
      res.converged = true;
      break;
    }
    Vector z = duality_map(dual(X), T.adjoint(duality_map(Y, y)));
    const double nz = norm(X, z);
    if (nz == 0.0) {
      if (++restarts > 5) throw std::runtime_error("power_method: iterates keep collapsing to 0");
      x = fresh();
      x /= norm(X, x);
      continue;
    }
    x = z / nz;
  }
  res.value = est;
  return res;
}

}  // namespace banachpd
