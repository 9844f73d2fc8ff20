// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <vector>

#include "tensor.hpp"

namespace lorafa {

struct QrResult {
  Tensor q;   // [d x r], orthonormal columns
  Tensor rr;  // [r x r], upper triangular, non-negative diagonal
};

/// Thin Householder QR of a tall matrix (rows >= cols). Rank-deficient input
/// is accepted; the corresponding diagonal entries of `rr` come out near zero.
QrResult qr(const Tensor& m);

/// Magnitudes of the R diagonal from column-pivoted Householder QR, in
/// non-increasing order. Wide inputs are transposed first (rank is invariant).
std::vector<double> pivoted_qr_diagonal(const Tensor& m);

/// Number of pivoted-QR diagonal entries strictly above `threshold`.
std::size_t numerical_rank(const Tensor& m, double threshold);

/// Numerical rank with threshold `relative * max|diag|`.
std::size_t numerical_rank_relative(const Tensor& m, double relative);

}  // namespace lorafa
