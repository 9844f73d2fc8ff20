// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "equivalence.hpp"

#include <cmath>

#include "errors.hpp"
#include "linalg.hpp"
#include "ops.hpp"

namespace lorafa {

CompressionTranscript compress_decompress(const Tensor& a, const Tensor& dW) {
  require(a.dims() == 2 && dW.dims() == 2, ErrorKind::Dimension,
          "compress_decompress takes matrices");
  require(a.extent(0) == dW.extent(0), ErrorKind::Dimension,
          "A " + to_string(a.shape()) + " and dW " + to_string(dW.shape()) +
              " disagree on d_in");
  CompressionTranscript t;
  t.dW = dW;
  t.compressed = matmul_tn(a, dW);
  t.decompressed = matmul(a, t.compressed);
  return t;
}

SgdEquivalence verify_sgd_equivalence(const AdaptedLinear& layer, const Tensor& x,
                                      const Tensor& dy, double eta) {
  require(layer.mode() == AdaptationMode::LoRAFA, ErrorKind::Mode,
          "sgd equivalence is stated for lora-fa layers, got " +
              std::string(to_string(layer.mode())));
  require(eta >= 0.0, ErrorKind::Parameter, "learning rate must be non-negative");

  AdaptedLinear work = layer;
  const Tensor before = work.merge();
  const auto out = work.forward(x);
  const auto grads = work.backward(out.kept, dy);
  axpy_inplace(work.b_mut(), -eta, *grads.dB);
  const Tensor after = work.merge();

  SgdEquivalence res;
  res.delta_w = sub(after, before);
  const Tensor dW = matmul_tn(x, dy);
  const double alpha = layer.alpha();
  res.predicted = scale(compress_decompress(*layer.a(), dW).decompressed, -eta * alpha * alpha);
  res.discrepancy = max_abs_diff(res.delta_w, res.predicted);
  return res;
}

double estimate_unbiasedness(std::size_t d, std::size_t r, std::size_t num_samples, Rng& rng) {
  require(d >= 1 && r >= 1 && num_samples >= 1, ErrorKind::Parameter,
          "estimate_unbiasedness needs d, r, num_samples >= 1");
  std::vector<double> sum(d * d, 0.0);
  for (std::size_t n = 0; n < num_samples; ++n) {
    const Tensor a = randn({d, r}, rng, 1.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < r; ++k) acc += a[i * r + k] * a[j * r + k];
        sum[i * d + j] += acc;
      }
  }
  const double inv = 1.0 / static_cast<double>(num_samples);
  const double rd = static_cast<double>(r);
  double err2 = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double diff = sum[i * d + j] * inv - (i == j ? rd : 0.0);
      err2 += (i == j ? 1.0 : 2.0) * diff * diff;
    }
  return std::sqrt(err2) / (rd * std::sqrt(static_cast<double>(d)));
}

Tensor SubspaceReport::rbar(const Tensor& b) const { return matmul(rr, b); }

SubspaceReport subspace_check(const Tensor& a, const Tensor& delta_w) {
  require(a.dims() == 2 && delta_w.dims() == 2 && a.extent(0) == delta_w.extent(0),
          ErrorKind::Dimension,
          "subspace_check needs A [d_in, r] and dW [d_in, d_out], got " + to_string(a.shape()) +
              " and " + to_string(delta_w.shape()));
  auto [q, rr] = qr(a);
  SubspaceReport rep{std::move(q), std::move(rr), 0.0, 0};
  const double norm = frobenius_norm(delta_w);
  if (norm == 0.0) return rep;
  const Tensor proj = matmul(rep.q, matmul_tn(rep.q, delta_w));
  rep.residual = frobenius_norm(sub(delta_w, proj)) / norm;
  rep.numerical_rank = numerical_rank(delta_w, kSubspaceRankThreshold * norm);
  return rep;
}

}  // namespace lorafa
