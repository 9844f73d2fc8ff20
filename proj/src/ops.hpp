// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <span>

#include "rng.hpp"
#include "tensor.hpp"

namespace lorafa {

// Matrix products. Every result is checked finite.
//
//   matmul(a, b)     a [.., m, k] x b [k, n]       -> [.., m, n]  (b broadcast)
//                    a [B.., m, k] x b [B.., k, n] -> [B.., m, n] (batched)
//   matmul_nt(a, b)  a x b^T, with b [n, k] or [B.., n, k]
//   matmul_tn(a, b)  a^T x b with every leading dim folded into the
//                    contraction: a [.., k, m], b [.., k, n] -> [m, n].
//                    This is the weight-gradient form X^T dY.
//   batched_matmul_tn(a, b)  per-batch a^T x b: [B.., k, m], [B.., k, n] -> [B.., m, n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor batched_matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);

/// Elementwise sum. Shapes must match, or one operand's shape must be a
/// trailing suffix of the other's (it is then broadcast over the leading dims).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
/// a += factor * b, in place; shapes must match.
void axpy_inplace(Tensor& a, double factor, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);

/// GeLU, tanh approximation:
/// 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
double gelu_scalar(double x);
double gelu_derivative(double x);

/// Row softmax over the trailing dimension, max-subtracted. With `causal`,
/// the input is viewed as [.., s, s] and entry (t, u) with u > t gets
/// probability exactly 0.
Tensor softmax_rows(const Tensor& x, bool causal = false);

/// Per-row normalization over the trailing dimension followed by the affine
/// map gamma * xhat + beta; gamma and beta have shape [cols].
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

/// i.i.d. N(0, std^2) draws in row-major order; advances `rng`.
Tensor randn(const Shape& shape, Rng& rng, double std, Precision precision = Precision::F64);

/// Mean token cross-entropy over rows of `logits` [N, V] whose target is
/// non-negative; targets < 0 are ignored. Returns the loss and the gradient
/// with respect to the logits.
struct CrossEntropy {
  double loss = 0.0;
  Tensor dlogits;
  std::size_t counted = 0;
};
CrossEntropy cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets);

}  // namespace lorafa
