// SPDX-License-Identifier: Apache-2.0
#include "banachpd/fourier.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace banachpd::fourier {

namespace {

// Applies a 1-d transform along every axis of the flat row-major hypercube.
template <typename Transform1d>
CVector transform_all_axes(const CVector& v, Index n, int dims, Transform1d&& tr) {
  if (dims < 1) throw std::invalid_argument("fourier: dims must be >= 1");
  Index total = 1;
  for (int a = 0; a < dims; ++a) total *= n;
  if (v.size() != total) throw std::invalid_argument("fourier: size != n^dims");

  CVector work = v;
  CVector line(n), out(n);
  Index stride = total / n;  // axis 0 stride in row-major layout
  for (int axis = 0; axis < dims; ++axis) {
    const Index block = stride * n;
    for (Index outer = 0; outer < total / block; ++outer) {
      for (Index inner = 0; inner < stride; ++inner) {
        const Index base = outer * block + inner;
        for (Index k = 0; k < n; ++k) line[k] = work[base + k * stride];
        tr(out, line);
        for (Index k = 0; k < n; ++k) work[base + k * stride] = out[k];
      }
    }
    stride /= n;
  }
  return work;
}

}  // namespace

CVector dft(const CVector& v, Index n_axis, int dims) {
  Eigen::FFT<double> fft;
  return transform_all_axes(v, n_axis, dims,
                            [&fft](CVector& dst, const CVector& src) { fft.fwd(dst, src); });
}

CVector idft(const CVector& v, Index n_axis, int dims) {
  Eigen::FFT<double> fft;
  return transform_all_axes(v, n_axis, dims,
                            [&fft](CVector& dst, const CVector& src) { fft.inv(dst, src); });
}

Vector real_part_checked(const CVector& v, double tol) {
  const double re_scale = std::max(1.0, v.real().cwiseAbs().maxCoeff());
  const double im_max = v.imag().cwiseAbs().maxCoeff();
  if (!(im_max <= tol * re_scale))
    throw std::runtime_error("fourier: non-real result, imaginary residue " + std::to_string(im_max));
  return v.real();
}

}  // namespace banachpd::fourier
