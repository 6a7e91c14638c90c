// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "banachpd/types.hpp"

namespace banachpd::fourier {

// Unnormalized forward DFT applied along every axis of an n^dims hypercube,
// stored flat in row-major order. idft is the exact inverse (1/n per axis).
CVector dft(const CVector& v, Index n_axis, int dims);
CVector idft(const CVector& v, Index n_axis, int dims);

// Integer frequency of bin k on an n-point axis: {0,..,n/2-1, -n/2,..,-1}.
inline Index freq_of_bin(Index k, Index n) { return k < (n + 1) / 2 ? k : k - n; }

// Real part of v; throws if the relative imaginary residue exceeds tol.
Vector real_part_checked(const CVector& v, double tol = 1e-12);

}  // namespace banachpd::fourier
