// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <doctest.h>

#include "banachpd/argmin_oracle.hpp"
#include "banachpd/resolvents.hpp"
#include "banachpd/spaces.hpp"
#include "test_util.hpp"

using namespace banachpd;
using testutil::random_vec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("power norm resolvent") {
  std::mt19937_64 g(101);
  SUBCASE("r = 2 is a scaled duality map") {
    auto X = make_weighted_lr(1.5, testutil::random_positive(g, 4, 0.5, 2.0));
    Vector xs = random_vec(g, 4);
    Vector z = res_power_norm(X, 2.0, 0.7, xs);
    CHECK((z - duality_map(dual(X), xs) / 1.7).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("cubic penalty with unit step halves a norm-2 input") {
    auto X = make_lr(2.0, 2);
    Vector z = res_power_norm(X, 3.0, 1.0, vec2(2.0, 0.0));
    CHECK((z - vec2(1.0, 0.0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("zero input maps to zero") {
    CHECK(res_power_norm(make_lr(1.25, 3), 1.5, 2.0, Vector::Zero(3)).norm() == 0.0);
  }
  SUBCASE("scalar root residuals") {
    std::uniform_real_distribution<double> ts(0.01, 5.0), rr(1.05, 3.5), cc(0.0, 20.0);
    for (int t = 0; t < 500; ++t) {
      const double a = power_root(ts(g), 2.0 + 0.0 * rr(g), cc(g));
      (void)a;
      const double s = ts(g), r = rr(g), c = cc(g);
      const double root = power_root(s, r, c);
      CHECK(std::abs(s * std::pow(root, r - 1.0) + root - c) <= 1e-12 * (1.0 + c));
    }
  }
  SUBCASE("output norm equals the root") {
    auto X = make_weighted_lr(1.25, testutil::random_positive(g, 5, 0.5, 2.0));
    Vector xs = random_vec(g, 5);
    const double tau = 0.8, scale = 1.7, rf = 1.6;
    Vector z = res_power_norm(X, rf, tau, xs, scale);
    const double a = power_root(tau * scale, rf, norm(dual(X), xs));
    CHECK(norm(X, z) == doctest::Approx(a).epsilon(1e-10));
  }
  SUBCASE("matches the brute-force oracle") {
    auto X = make_weighted_lr(1.25, testutil::random_positive(g, 3, 0.5, 2.0));
    Vector xs = random_vec(g, 3);
    for (double rf : {1.5, 3.0}) {
      const double tau = 0.6, scale = 2.0;
      Vector z = res_power_norm(X, rf, tau, xs, scale);
      auto h = [&](const Vector& v) { return scale / rf * std::pow(norm(X, v), rf); };
      auto orc = argmin_oracle(X, h, tau, xs);
      CHECK(orc.converged);
      CHECK((z - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
  SUBCASE("sobolev space goes through the same closed form") {
    auto X = make_sobolev(1.5, 1.0, 1, 4);
    std::mt19937_64 gg(7);
    Vector xs = random_vec(gg, 4);
    Vector z = res_power_norm(X, 1.5, 0.5, xs);
    auto h = [&](const Vector& v) { return 1.0 / 1.5 * std::pow(norm(X, v), 1.5); };
    auto orc = argmin_oracle(X, h, 0.5, xs);
    CHECK(orc.converged);
    CHECK((z - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("l1 resolvent") {
  std::mt19937_64 g(103);
  SUBCASE("plain soft threshold in hilbert space") {
    Vector z = res_l1(make_lr(2.0, 2), 1.0, vec2(3.0, -0.5));
    CHECK((z - vec2(2.0, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("full shrinkage below the threshold") {
    auto X = make_weighted_lr(1.25, testutil::random_positive(g, 3, 0.5, 2.0));
    CHECK(res_l1(X, 2.0, vec3(1.0, -1.5, 0.25)).norm() == 0.0);
  }
  SUBCASE("shrink-then-map on l^1.25, certified by the oracle") {
    auto X = make_lr(1.25, 3);
    Vector xs = vec3(2.0, -1.0, 0.25);
    Vector z = res_l1(X, 0.5, xs);
    CHECK((z - duality_map(dual(X), vec3(1.5, -0.5, 0.0))).cwiseAbs().maxCoeff() <= 1e-14);
    auto h = [](const Vector& v) { return v.lpNorm<1>(); };
    auto orc = argmin_oracle(X, h, 0.5, xs);
    CHECK(orc.converged);
    CHECK((z - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("rejected on smoothing-norm spaces") {
    CHECK_THROWS_AS((void)res_l1(make_sobolev(1.5, 1.0, 1, 4), 1.0, Vector::Zero(4)),
                    std::invalid_argument);
  }
}

TEST_CASE("box resolvent") {
  std::mt19937_64 g(107);
  SUBCASE("interior points pass through") {
    auto X = make_weighted_lr(1.5, testutil::random_positive(g, 3, 0.5, 2.0));
    Vector target = vec3(0.3, -0.2, 0.1);
    Vector xs = duality_map(X, target);
    Vector z = res_box(X, Vector::Constant(3, -1.0), Vector::Constant(3, 1.0), xs);
    CHECK((z - target).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("hilbert projection clips componentwise") {
    Vector z = res_box(make_lr(2.0, 2), vec2(0.0, 0.0), vec2(kInf, kInf), vec2(-1.0, 2.0));
    CHECK((z - vec2(0.0, 2.0)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("coupled norm lifts the free coordinate above the naive clip") {
    auto X = make_lr(1.5, 2);
    Vector xs = duality_map(X, vec2(2.0, 0.5));
    Vector lo = Vector::Zero(2), hi = Vector::Ones(2);
    Vector z = res_box(X, lo, hi, xs);
    CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(z[1] > 0.6);
    CHECK(z[1] == doctest::Approx(0.7678).epsilon(2e-3));
    auto h = [&](const Vector& v) {
      return (v.array() >= -1e-12 && v.array() <= 1.0 + 1e-12).all() ? 0.0 : kInf;
    };
    Vector start = vec2(0.5, 0.5);
    auto orc = argmin_oracle(X, h, 1.0, xs, &start);
    CHECK(orc.converged);
    CHECK((z - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("empty box is rejected") {
    CHECK_THROWS_AS(
        (void)res_box(make_lr(1.5, 2), vec2(1.0, 0.0), vec2(0.0, 1.0), vec2(0.0, 0.0)),
        std::invalid_argument);
  }
}

TEST_CASE("zero resolvent is the dual-to-primal map") {
  std::mt19937_64 g(109);
  auto X = make_weighted_lr(1.25, testutil::random_positive(g, 4, 0.5, 2.0));
  Vector xs = random_vec(g, 4);
  CHECK((res_zero(X, xs) - duality_map(dual(X), xs)).cwiseAbs().maxCoeff() == 0.0);
  auto orc = argmin_oracle(X, [](const Vector&) { return 0.0; }, 1.0, xs);
  CHECK((res_zero(X, xs) - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("quadratic data resolvent") {
  std::mt19937_64 g(113);
  SUBCASE("kernel point") {
    auto Y = make_lr(1.5, 2);
    Vector y0 = vec2(0.5, -1.0);
    CHECK(res_quadratic_data(Y, 2.0, y0, Vector(2.0 * y0)).norm() == 0.0);
  }
  SUBCASE("hilbert halving") {
    Vector y(1), y0(1);
    y << 2.0;
    y0 << 0.0;
    CHECK(res_quadratic_data(make_lr(2.0, 1), 1.0, y0, y)[0] == doctest::Approx(1.0));
  }
  SUBCASE("weighted map applies the weight") {
    Vector w(1), y0(1), y(1);
    w << 4.0;
    y0 << 1.0;
    y << 7.0;
    CHECK(res_quadratic_data(make_weighted_lr(2.0, w), 3.0, y0, y)[0] == doctest::Approx(4.0));
  }
  SUBCASE("agrees with the decomposition route exactly") {
    auto Y = make_weighted_lr(1.5, testutil::random_positive(g, 4, 0.5, 2.0));
    Vector y0 = random_vec(g, 4), y = random_vec(g, 4);
    const double sigma = 1.3;
    InnerResolvent inner = [&](double s, const Vector& yy) {
      return Vector((yy + y0) / (s + 1.0));
    };
    Vector a = res_quadratic_data(Y, sigma, y0, y);
    Vector b = moreau_gstar_resolvent(Y, sigma, inner, y);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("matches the oracle on the dual side") {
    auto Y = make_weighted_lr(1.5, testutil::random_positive(g, 3, 0.5, 2.0));
    Vector y0 = random_vec(g, 3), y = random_vec(g, 3);
    const double sigma = 0.9;
    DualResolvent R(Y, DataFidelitySpec::quadratic(y0));
    auto h = [&](const Vector& q) { return R.conjugate_value(q); };
    auto orc = argmin_oracle(dual(Y), h, sigma, y);
    CHECK(orc.converged);
    CHECK((R.resolve(sigma, y) - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("poisson inner resolvent") {
  SUBCASE("observed count is a fixed point") {
    Vector one = Vector::Ones(1);
    CHECK(res_kl_inner(1.0, one, one, one)[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("zero counts collapse to a positive-part formula") {
    Vector yobs = Vector::Zero(2), w = vec2(2.0, 2.0);
    Vector y = vec2(3.0, -1.0);
    Vector z = res_kl_inner(4.0, yobs, w, y);
    CHECK(z[0] == doctest::Approx((3.0 - 0.5) / 4.0).epsilon(1e-14));
    CHECK(z[1] == 0.0);
  }
  SUBCASE("scalar cases agree with the oracle") {
    std::mt19937_64 g(127);
    std::uniform_real_distribution<double> U(0.1, 3.0), Uy(-2.0, 2.0);
    auto X1 = make_lr(2.0, 1);
    for (int t = 0; t < 8; ++t) {
      const double sigma = U(g), w = U(g), yd = t % 2 ? U(g) : 0.0, y = Uy(g);
      auto h = [&](const Vector& v) {
        if (v[0] < 0.0 || (yd > 0.0 && v[0] <= 0.0)) return kInf;
        return v[0] - (yd > 0.0 ? yd * std::log(v[0]) : 0.0);
      };
      Vector input(1), start(1);
      input << y / sigma;
      start << std::max(yd, 1.0);
      auto orc = argmin_oracle(X1, h, 1.0 / (w * sigma), input, &start);
      Vector z = res_kl_inner(sigma, Vector::Constant(1, yd), Vector::Constant(1, w),
                              Vector::Constant(1, y));
      CHECK(std::abs(z[0] - orc.z[0]) <= 1e-8);
    }
  }
  SUBCASE("shifted variant solves the shifted inclusion") {
    std::mt19937_64 g(131);
    Vector yobs = vec3(2.0, 0.0, 1.0), w = vec3(0.5, 1.0, 2.0), b = vec3(0.2, -0.1, 0.4);
    Vector y = random_vec(g, 3);
    const double sigma = 0.7;
    Vector z = res_kl_inner_shifted(sigma, yobs, w, b, y);
    for (Index j = 0; j < 3; ++j) {
      const double v = z[j] + b[j];
      if (yobs[j] > 0.0) CHECK(v > 0.0);
      const double resid = (1.0 - (v > 0.0 ? yobs[j] / v : 0.0)) / w[j] + sigma * z[j] - y[j];
      if (v > 0.0) CHECK(std::abs(resid) <= 1e-10);
    }
    Vector z0 = res_kl_inner_shifted(sigma, yobs, w, Vector::Zero(3), y);
    CHECK((z0 - res_kl_inner(sigma, yobs, w, y)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("poisson dual resolvent against the oracle") {
  std::mt19937_64 g(137);
  Vector w = testutil::random_positive(g, 3, 0.5, 2.0);
  auto Y = make_weighted_lr(2.0, w);
  Vector yobs = vec3(1.5, 0.0, 2.5);
  DualResolvent R(Y, DataFidelitySpec::kl(yobs, w));
  Vector y = random_vec(g, 3);
  const double sigma = 0.8;
  Vector p = R.resolve(sigma, y);
  CHECK((p.array() <= 1.0).all());
  auto h = [&](const Vector& q) { return R.conjugate_value(q); };
  Vector start = Vector::Zero(3);
  auto orc = argmin_oracle(dual(Y), h, sigma, y, &start);
  CHECK(orc.converged);
  CHECK((p - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(R.conjugate_value(Vector::Constant(3, 1.5)) == kInf);
  CHECK(std::isfinite(R.conjugate_value(Vector::Constant(3, 0.5))));
}

TEST_CASE("decomposition route for an l1 fidelity") {
  // g = ||.||_1 in hilbert space: inner solve soft-thresholds, and the
  // decomposition must land on the clip of y onto [-1,1]^n (the conjugate is
  // a box indicator, so its resolvent is the metric projection).
  std::mt19937_64 g(139);
  auto Y = make_lr(2.0, 3);
  InnerResolvent inner = [](double s, const Vector& y) {
    Vector v(y.size());
    for (Index j = 0; j < y.size(); ++j) {
      const double m = std::abs(y[j]) - 1.0;
      v[j] = m > 0.0 ? (y[j] < 0.0 ? -m : m) / s : 0.0;
    }
    return v;
  };
  for (int t = 0; t < 5; ++t) {
    Vector y = random_vec(g, 3, -3.0, 3.0);
    const double sigma = 0.5 + t;
    Vector p = moreau_gstar_resolvent(Y, sigma, inner, y);
    Vector expect = y.cwiseMin(1.0).cwiseMax(-1.0);
    CHECK((p - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
  auto h = [&](const Vector& q) { return (q.cwiseAbs().array() <= 1.0 + 1e-12).all() ? 0.0 : kInf; };
  Vector y = vec3(2.0, -0.4, -3.0);
  Vector start = Vector::Zero(3);
  auto orc = argmin_oracle(Y, h, 1.0, y, &start);
  CHECK((moreau_gstar_resolvent(Y, 1.0, inner, y) - orc.z).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("subgradient inclusion certificates") {
  std::mt19937_64 g(149);
  std::vector<SpaceDescriptor> spaces = {
      make_lr(2.0, 4), make_weighted_lr(1.25, testutil::random_positive(g, 4, 0.5, 2.0))};
  std::vector<PrimalFnSpec> fns = {
      PrimalFnSpec::power(1.5, 1.0), PrimalFnSpec::power(2.0, 0.8), PrimalFnSpec::power(3.0, 1.2),
      PrimalFnSpec::l1(0.7),
      PrimalFnSpec::box(Vector::Constant(4, -0.5), Vector::Constant(4, 1.0)),
      PrimalFnSpec::zero()};
  for (const auto& X : spaces) {
    for (const auto& fn : fns) {
      PrimalResolvent R(X, fn);
      for (double tau : {0.3, 1.7}) {
        Vector xs = random_vec(g, 4, -2.0, 2.0);
        Vector z = R.resolve(tau, xs);
        Vector sub = (xs - duality_map(X, z)) / tau;
        const double fz = R.value(z);
        REQUIRE(std::isfinite(fz));
        for (int t = 0; t < 100; ++t) {
          Vector wv = fn.tag == PrimalFnSpec::Tag::box
                          ? Vector(random_vec(g, 4, 0.0, 1.0).cwiseProduct(fn.upper - fn.lower) +
                                   fn.lower)
                          : random_vec(g, 4, -3.0, 3.0);
          CHECK(R.value(wv) >= fz + (wv - z).dot(sub) - 1e-8);
        }
      }
    }
  }
  // dual side: quadratic over a weighted l^1.5, poisson over a weighted l2
  {
    auto Y = make_weighted_lr(1.5, testutil::random_positive(g, 4, 0.5, 2.0));
    DualResolvent R(Y, DataFidelitySpec::quadratic(random_vec(g, 4)));
    Vector y = random_vec(g, 4);
    const double sigma = 0.6;
    Vector z = R.resolve(sigma, y);
    Vector sub = (y - duality_map(dual(Y), z)) / sigma;
    const double gz = R.conjugate_value(z);
    for (int t = 0; t < 100; ++t) {
      Vector wv = random_vec(g, 4, -3.0, 3.0);
      CHECK(R.conjugate_value(wv) >= gz + (wv - z).dot(sub) - 1e-8);
    }
  }
  {
    Vector w = testutil::random_positive(g, 4, 0.5, 2.0);
    auto Y = make_weighted_lr(2.0, w);
    Vector yobs = random_vec(g, 4, 0.0, 3.0);
    yobs[1] = 0.0;
    DualResolvent R(Y, DataFidelitySpec::kl(yobs, w));
    Vector y = random_vec(g, 4);
    const double sigma = 1.1;
    Vector z = R.resolve(sigma, y);
    Vector sub = (y - duality_map(dual(Y), z)) / sigma;
    const double gz = R.conjugate_value(z);
    REQUIRE(std::isfinite(gz));
    for (int t = 0; t < 100; ++t) {
      Vector wv = random_vec(g, 4, -2.0, 0.95);
      CHECK(R.conjugate_value(wv) >= gz + (wv - z).dot(sub) - 1e-8);
    }
  }
}

TEST_CASE("convexity modulus metadata") {
  std::mt19937_64 g(151);
  auto X = make_lr(1.5, 4);
  CHECK(PrimalResolvent(X, PrimalFnSpec::power(2.0, 0.7)).convexity_modulus() == 0.7);
  CHECK(PrimalResolvent(X, PrimalFnSpec::power(1.5, 1.0)).convexity_modulus() == 0.0);
  CHECK(PrimalResolvent(X, PrimalFnSpec::l1()).convexity_modulus() == 0.0);
  CHECK(PrimalResolvent(X, PrimalFnSpec::zero()).convexity_modulus() == 0.0);
  CHECK(DualResolvent(X, DataFidelitySpec::quadratic(Vector::Zero(4))).convexity_modulus() == 1.0);
  Vector w = Vector::Ones(4);
  CHECK(DualResolvent(make_weighted_lr(2.0, w), DataFidelitySpec::kl(Vector::Ones(4), w))
            .convexity_modulus() == 0.0);
  // the certified identity behind the quadratic modulus
  for (int t = 0; t < 50; ++t) {
    Vector u = random_vec(g, 4), x = random_vec(g, 4);
    const double nu = norm(X, u), nx = norm(X, x);
    const double gap = 0.5 * nu * nu - 0.5 * nx * nx - (u - x).dot(duality_map(X, x));
    CHECK(gap == doctest::Approx(bregman(X, u, x)).epsilon(1e-10));
  }
}

TEST_CASE("argmin oracle basics") {
  std::mt19937_64 g(157);
  auto X = make_weighted_lr(1.5, testutil::random_positive(g, 3, 0.5, 2.0));
  Vector u = random_vec(g, 3);
  auto zero_h = [](const Vector&) { return 0.0; };
  CHECK((argmin_oracle(X, zero_h, 1.0, u).z - duality_map(dual(X), u)).cwiseAbs().maxCoeff() <=
        1e-8);
  auto XH = make_lr(2.0, 3);
  auto half_sq = [&](const Vector& v) { return 0.5 * v.squaredNorm(); };
  CHECK((argmin_oracle(XH, half_sq, 3.0, u).z - u / 4.0).cwiseAbs().maxCoeff() <= 1e-8);
  auto l1_h = [](const Vector& v) { return v.lpNorm<1>(); };
  CHECK((argmin_oracle(XH, l1_h, 0.4, u).z - res_l1(XH, 0.4, u)).cwiseAbs().maxCoeff() <= 1e-8);
}
