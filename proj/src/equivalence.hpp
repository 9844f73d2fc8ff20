// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstddef>

#include "adapters.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace lorafa {

struct CompressionTranscript {
  Tensor dW;            // [d_in x d_out]
  Tensor compressed;    // [r x d_out]   = A^T dW
  Tensor decompressed;  // [d_in x d_out] = A A^T dW
};

CompressionTranscript compress_decompress(const Tensor& a, const Tensor& dW);

struct SgdEquivalence {
  Tensor delta_w;     // merged(after) - merged(before)
  Tensor predicted;   // -eta alpha^2 A A^T (X^T dY)
  double discrepancy = 0.0;  // max |delta_w - predicted|
};

/// Runs one SGD step on a copy of a LoRA-FA layer and compares the change of
/// its merged weight with the projected full gradient. `layer` is untouched.
SgdEquivalence verify_sgd_equivalence(const AdaptedLinear& layer, const Tensor& x,
                                      const Tensor& dy, double eta);

/// ||mean(A A^T) - r I||_F / ||r I||_F over `num_samples` draws of a d x r
/// matrix with unit-normal entries.
double estimate_unbiasedness(std::size_t d, std::size_t r, std::size_t num_samples, Rng& rng);

constexpr double kSubspaceRankThreshold = 1e-8;  // relative to ||dW||_F

struct SubspaceReport {
  Tensor q;               // orthonormal basis of col(A)
  Tensor rr;              // A = Q R
  double residual = 0.0;  // ||dW - Q Q^T dW||_F / ||dW||_F, 0 when dW = 0
  std::size_t numerical_rank = 0;

  /// B-bar = R B, so that A B = Q B-bar.
  Tensor rbar(const Tensor& b) const;
};

SubspaceReport subspace_check(const Tensor& a, const Tensor& delta_w);

}  // namespace lorafa
