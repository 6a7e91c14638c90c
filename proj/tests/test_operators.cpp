// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <doctest.h>

#include "banachpd/fresnel.hpp"
#include "banachpd/operators.hpp"
#include "test_util.hpp"

using namespace banachpd;
using testutil::random_vec;

namespace {

void check_adjoint(const LinearOp& T, Index nx, Index ny, std::mt19937_64& g, double tol = 1e-10) {
  for (int t = 0; t < 20; ++t) {
    Vector x = random_vec(g, nx), q = random_vec(g, ny);
    const double a = T.apply(x).dot(q), b = x.dot(T.adjoint(q));
    CHECK(std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}));
  }
}

FresnelConfig small_cfg(Index n) {
  FresnelConfig cfg;
  cfg.n = n;
  cfg.kappa = 10.0;
  cfg.source_distance = 2.0;
  cfg.detector_distance = 1.0;
  return cfg;
}

Vector diag123() {
  Vector d(3);
  d << 1.0, 2.0, 3.0;
  return d;
}

}  // namespace

TEST_CASE("convolution operator quadrature") {
  const Index nx = 9, ny = 11;
  auto T = conv_operator(5.0, nx, ny);
  const double h = 1.0 / static_cast<double>(nx - 1);

  CHECK(T.apply(Vector::Zero(nx)).norm() == 0.0);

  // a unit-mass spike reproduces the kernel on the output grid
  for (Index j : {Index(0), Index(4), Index(nx - 1)}) {
    Vector x = Vector::Zero(nx);
    x[j] = (j == 0 || j == nx - 1) ? 2.0 / h : 1.0 / h;
    Vector col = T.apply(x);
    const double s = -0.5 + static_cast<double>(j) * h;
    for (Index i = 0; i < ny; ++i) {
      const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(ny - 1);
      CHECK(col[i] == doctest::Approx(std::exp(-5.0 * std::abs(t - s))).epsilon(1e-13));
    }
  }

  std::mt19937_64 g(211);
  check_adjoint(T, nx, ny, g);

  // unit-quadrature variant: bare kernel samples
  auto U = conv_operator(5.0, nx, ny, true);
  Vector e0 = Vector::Zero(nx);
  e0[0] = 1.0;
  CHECK(U.apply(e0)[0] == doctest::Approx(std::exp(-5.0 * std::abs(-1.0 + 0.5))).epsilon(1e-14));
}

TEST_CASE("power method on hilbert pairs") {
  std::mt19937_64 g(223);
  SUBCASE("identity") {
    auto T = matrix_op(Matrix::Identity(5, 5));
    CHECK(power_method(T, T.domain, T.range).value == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("diagonal") {
    Matrix D = diag123().asDiagonal();
    auto T = matrix_op(D);
    auto r = power_method(T, T.domain, T.range, 2000, 1e-12);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-8));
  }
  SUBCASE("random rectangular matrix vs svd") {
    Matrix A = testutil::random_mat(g, 48, 32);
    auto T = matrix_op(A);
    auto r = power_method(T, T.domain, T.range, 5000, 1e-13);
    const double smax = Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
    CHECK(std::abs(r.value - smax) <= 1e-6 * smax);
  }
}

TEST_CASE("power method on a banach domain") {
  std::mt19937_64 g(227);
  const Index n = 10, m = 12;
  Matrix A = testutil::random_mat(g, m, n);
  auto X = make_lr(1.25, n);
  auto Y = make_lr(2.0, m);
  auto T = matrix_op(A, X, Y);
  auto r = power_method(T, X, Y, 2000, 1e-11);
  REQUIRE(r.value > 0.0);

  // primal and adjoint-side estimates agree at stationarity
  Vector y = T.apply(r.x);
  const double lambda = norm(Y, y);
  const double mu = norm(dual(X), T.adjoint(duality_map(Y, y))) / lambda;
  CHECK(std::abs(lambda - mu) <= 0.01 * lambda);

  // certified lower bound: beats random unit vectors
  double best = 0.0;
  for (int t = 0; t < 2000; ++t) {
    Vector x = random_vec(g, n);
    best = std::max(best, T.apply(x).norm() / norm(X, x));
  }
  CHECK(r.value >= best - 1e-12);

  // interpolation upper bound ||T||_{1->2}^theta ||T||_{2->2}^{1-theta}
  double col = 0.0;
  for (Index j = 0; j < n; ++j) col = std::max(col, A.col(j).norm());
  const double smax = Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
  const double theta = 2.0 / 1.25 - 1.0;
  CHECK(r.value <= std::pow(col, theta) * std::pow(smax, 1.0 - theta) * (1.0 + 1e-10));
}

TEST_CASE("fresnel propagation") {
  auto cfg = small_cfg(8);
  std::mt19937_64 g(229);
  CVector f(64);
  for (Index j = 0; j < 64; ++j) f[j] = Complex(random_vec(g, 1)[0], random_vec(g, 1)[0]);

  SUBCASE("zero distance is the identity") {
    CHECK((fresnel_propagate(cfg, f, 0.0) - f).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("constant fields are fixed points") {
    CVector c = CVector::Constant(64, Complex(0.7, -0.2));
    CHECK((fresnel_propagate(cfg, c, 0.35) - c).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("round trip and unitarity") {
    CVector fwd = fresnel_propagate(cfg, f, 0.4);
    CHECK(std::abs(fwd.norm() - f.norm()) <= 1e-12 * f.norm());
    CHECK((fresnel_propagate(cfg, fwd, -0.4) - f).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("phase intensity map") {
  auto cfg = small_cfg(8);
  const double m2 = cfg.magnification() * cfg.magnification();
  std::mt19937_64 g(233);
  Vector phi = random_vec(g, 64, -0.5, 0.5);

  SUBCASE("flat phase gives flat intensity") {
    Vector I = phase_forward(cfg, Vector::Zero(64));
    CHECK((I.array() - 1.0 / m2).abs().maxCoeff() <= 1e-14);
  }
  SUBCASE("global phase shifts are invisible") {
    Vector I1 = phase_forward(cfg, phi);
    Vector I2 = phase_forward(cfg, Vector(phi.array() + 0.37));
    CHECK((I1 - I2).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("vanishing wavenumber flattens the output") {
    auto weak = cfg;
    weak.kappa = 1e-9;
    Vector I = phase_forward(weak, phi);
    CHECK((I.array() - 1.0 / m2).abs().maxCoeff() <= 1e-6);
  }
  SUBCASE("energy conservation through the propagator") {
    Vector I = phase_forward(cfg, phi);
    CHECK(I.sum() == doctest::Approx(64.0 / m2).epsilon(1e-10));
    CHECK(I.minCoeff() >= 0.0);
  }
}

TEST_CASE("phase derivative") {
  auto cfg = small_cfg(16);
  const Index N = cfg.n * cfg.n;
  std::mt19937_64 g(239);
  Vector phi = random_vec(g, N, -0.3, 0.3);
  auto D = phase_derivative(cfg, phi);

  SUBCASE("zero direction maps to zero") { CHECK(D.apply(Vector::Zero(N)).norm() == 0.0); }

  SUBCASE("finite differences") {
    Vector h = random_vec(g, N);
    const double eps = 1e-6;
    Vector fd = (phase_forward(cfg, Vector(phi + eps * h)) - phase_forward(cfg, phi)) / eps;
    Vector an = D.apply(h);
    CHECK((fd - an).norm() <= 1e-5 * an.norm());
  }

  SUBCASE("adjoint identity") { check_adjoint(D, N, N, g); }

  SUBCASE("nonlinear wrapper is consistent") {
    auto T = phase_operator(cfg);
    CHECK((T.apply(phi) - phase_forward(cfg, phi)).norm() == 0.0);
    Vector h = random_vec(g, N);
    CHECK((T.derivative_at(phi).apply(h) - D.apply(h)).norm() == 0.0);
  }
}
