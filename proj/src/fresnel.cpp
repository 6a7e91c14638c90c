// SPDX-License-Identifier: Apache-2.0
#include "banachpd/fresnel.hpp"

#include <cmath>
#include <stdexcept>

#include "banachpd/fourier.hpp"

namespace banachpd {

void FresnelConfig::validate() const {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("FresnelConfig: n must be even and >= 2");
  if (!(kappa > 0.0)) throw std::invalid_argument("FresnelConfig: kappa must be positive");
  if (!(source_distance > 0.0) || !(detector_distance > 0.0))
    throw std::invalid_argument("FresnelConfig: distances must be positive");
  if (!(pixel_scale > 0.0)) throw std::invalid_argument("FresnelConfig: pixel_scale must be positive");
}

CVector fresnel_propagate(const FresnelConfig& cfg, const CVector& field, double c) {
  cfg.validate();
  const Index n = cfg.n;
  if (field.size() != n * n) throw std::invalid_argument("fresnel_propagate: field is not n*n");
  CVector fhat = fourier::dft(field, n, 2);
  const double inv_a = 1.0 / cfg.pixel_scale;
  for (Index idx = 0; idx < fhat.size(); ++idx) {
    const double f0 = static_cast<double>(fourier::freq_of_bin(idx / n, n)) * inv_a;
    const double f1 = static_cast<double>(fourier::freq_of_bin(idx % n, n)) * inv_a;
    const double phase = -c * (f0 * f0 + f1 * f1);
    fhat[idx] *= Complex(std::cos(phase), std::sin(phase));
  }
  return fourier::idft(fhat, n, 2);
}

namespace {

CVector phase_object(const FresnelConfig& cfg, const Vector& phi) {
  if (phi.size() != cfg.n * cfg.n) throw std::invalid_argument("phase object: phi is not n*n");
  CVector O(phi.size());
  for (Index j = 0; j < phi.size(); ++j) {
    const double a = -cfg.kappa * phi[j];
    O[j] = Complex(std::cos(a), std::sin(a));
  }
  return O;
}

}  // namespace

Vector phase_forward(const FresnelConfig& cfg, const Vector& phi) {
  cfg.validate();
  const double m2 = cfg.magnification() * cfg.magnification();
  CVector w = fresnel_propagate(cfg, phase_object(cfg, phi), cfg.chirp());
  return Vector(w.cwiseAbs2() / m2);
}

LinearOp phase_derivative(const FresnelConfig& cfg, const Vector& phi) {
  cfg.validate();
  const double m2 = cfg.magnification() * cfg.magnification();
  const double c = cfg.chirp();
  CVector O = phase_object(cfg, phi);
  CVector w = fresnel_propagate(cfg, O, c);
  CVector m = Complex(0.0, -cfg.kappa) * O;

  LinearOp op;
  op.domain = make_lr(2.0, phi.size());
  op.range = make_lr(2.0, phi.size());
  op.apply = [cfg, w, m, m2, c](const Vector& h) {
    CVector ph = fresnel_propagate(cfg, CVector(m.cwiseProduct(h.cast<Complex>())), c);
    return Vector(2.0 / m2 * (w.conjugate().cwiseProduct(ph)).real());
  };
  op.adjoint = [cfg, w, m, m2, c](const Vector& y) {
    CVector back = fresnel_propagate(cfg, CVector(w.cwiseProduct(y.cast<Complex>())), -c);
    return Vector(2.0 / m2 * (m.cwiseProduct(back.conjugate())).real());
  };
  return op;
}

NonlinearOp phase_operator(const FresnelConfig& cfg) {
  cfg.validate();
  NonlinearOp op;
  op.domain = make_lr(2.0, cfg.n * cfg.n);
  op.range = make_lr(2.0, cfg.n * cfg.n);
  op.apply = [cfg](const Vector& phi) { return phase_forward(cfg, phi); };
  op.derivative_at = [cfg](const Vector& phi) { return phase_derivative(cfg, phi); };
  return op;
}

}  // namespace banachpd
