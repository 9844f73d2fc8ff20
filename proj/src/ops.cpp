// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace lorafa {

namespace {

// C[m x n] = A[m x k] * B[k x n]; C must be zeroed.
void kernel_nn(const double* __restrict a, const double* __restrict b, double* __restrict c,
               std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

// C[m x n] += A[K x m]^T * B[K x n].
void kernel_tn(const double* __restrict a, const double* __restrict b, double* __restrict c,
               std::size_t rows, std::size_t m, std::size_t n) {
  for (std::size_t t = 0; t < rows; ++t) {
    const double* arow = a + t * m;
    const double* brow = b + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double ai = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ai * brow[j];
    }
  }
}

void transpose_block(const double* src, double* dst, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

Shape leading(const Shape& s, std::size_t drop) {
  return Shape(s.begin(), s.end() - static_cast<std::ptrdiff_t>(drop));
}

void require_matrix_like(const Tensor& t, const char* op) {
  require(t.dims() >= 2, ErrorKind::Dimension,
          std::string(op) + " needs operands with at least 2 dims, got " + to_string(t.shape()));
}

Tensor finish(Tensor t, const char* op) {
  t.round_to_precision();
  t.check_finite(op);
  return t;
}

}  // namespace

Tensor transpose(const Tensor& m) {
  require_matrix_like(m, "transpose");
  const std::size_t r = m.extent(m.dims() - 2);
  const std::size_t c = m.cols();
  Shape shape = m.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  Tensor out(shape, m.precision());
  const std::size_t batch = m.size() / (r * c);
  for (std::size_t bi = 0; bi < batch; ++bi)
    transpose_block(m.raw() + bi * r * c, out.raw() + bi * r * c, r, c);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix_like(a, "matmul");
  require_matrix_like(b, "matmul");
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();
  const std::size_t kb = b.extent(b.dims() - 2);
  require(k == kb, ErrorKind::Dimension,
          "matmul inner extents differ: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  Shape out_shape = leading(a.shape(), 1);
  out_shape.push_back(n);
  Tensor out(out_shape, promote(a.precision(), b.precision()));
  if (b.dims() == 2) {
    kernel_nn(a.raw(), b.raw(), out.raw(), a.rows(), k, n);
  } else {
    require(leading(a.shape(), 2) == leading(b.shape(), 2), ErrorKind::Dimension,
            "matmul batch extents differ: " + to_string(a.shape()) + " x " + to_string(b.shape()));
    const std::size_t m = a.extent(a.dims() - 2);
    const std::size_t batch = a.size() / (m * k);
    for (std::size_t bi = 0; bi < batch; ++bi)
      kernel_nn(a.raw() + bi * m * k, b.raw() + bi * k * n, out.raw() + bi * m * n, m, k, n);
  }
  return finish(std::move(out), "matmul");
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) { return matmul(a, transpose(b)); }

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix_like(a, "matmul_tn");
  require_matrix_like(b, "matmul_tn");
  require(a.rows() == b.rows(), ErrorKind::Dimension,
          "matmul_tn contraction extents differ: " + to_string(a.shape()) + " vs " +
              to_string(b.shape()));
  Tensor out({a.cols(), b.cols()}, promote(a.precision(), b.precision()));
  kernel_tn(a.raw(), b.raw(), out.raw(), a.rows(), a.cols(), b.cols());
  return finish(std::move(out), "matmul_tn");
}

Tensor batched_matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix_like(a, "batched_matmul_tn");
  require(a.dims() == b.dims() && leading(a.shape(), 1) == leading(b.shape(), 1),
          ErrorKind::Dimension,
          "batched_matmul_tn extents differ: " + to_string(a.shape()) + " vs " +
              to_string(b.shape()));
  const std::size_t k = a.extent(a.dims() - 2);
  const std::size_t m = a.cols();
  const std::size_t n = b.cols();
  Shape out_shape = leading(a.shape(), 2);
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out(out_shape, promote(a.precision(), b.precision()));
  const std::size_t batch = a.size() / (k * m);
  for (std::size_t bi = 0; bi < batch; ++bi)
    kernel_tn(a.raw() + bi * k * m, b.raw() + bi * k * n, out.raw() + bi * m * n, k, m, n);
  return finish(std::move(out), "batched_matmul_tn");
}

namespace {

bool is_suffix(const Shape& small, const Shape& big) {
  return small.size() <= big.size() && std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <class F>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, F f, const char* op) {
  if (a.shape() == b.shape()) {
    Tensor out(a.shape(), promote(a.precision(), b.precision()));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return finish(std::move(out), op);
  }
  if (is_suffix(b.shape(), a.shape())) {
    Tensor out(a.shape(), promote(a.precision(), b.precision()));
    const std::size_t inner = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i % inner]);
    return finish(std::move(out), op);
  }
  if (is_suffix(a.shape(), b.shape())) {
    Tensor out(b.shape(), promote(a.precision(), b.precision()));
    const std::size_t inner = a.size();
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = f(a[i % inner], b[i]);
    return finish(std::move(out), op);
  }
  fail(ErrorKind::Dimension, std::string(op) + " shapes not broadcast-compatible: " +
                                 to_string(a.shape()) + " vs " + to_string(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, [](double x, double y) { return x * y; }, "hadamard");
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (auto& v : out.data()) v *= factor;
  return finish(std::move(out), "scale");
}

void axpy_inplace(Tensor& a, double factor, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorKind::Dimension,
          "axpy shapes differ: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  double* pa = a.raw();
  const double* pb = b.raw();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += factor * pb[i];
  a.round_to_precision();
  a.check_finite("axpy");
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluK = 0.044715;
}  // namespace

double gelu_scalar(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluK * x * x * x)));
}

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluK * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluK * x * x);
}

Tensor gelu(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) v = gelu_scalar(v);
  return finish(std::move(out), "gelu");
}

Tensor softmax_rows(const Tensor& x, bool causal) {
  const std::size_t n = x.cols();
  require(n >= 1, ErrorKind::Dimension, "softmax over empty rows");
  std::size_t seq = 0;
  if (causal) {
    require(x.dims() >= 2 && x.extent(x.dims() - 2) == n, ErrorKind::Dimension,
            "causal softmax needs square trailing dims, got " + to_string(x.shape()));
    seq = n;
  }
  Tensor out(x.shape(), x.precision());
  const std::size_t rows = x.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.raw() + r * n;
    double* o = out.raw() + r * n;
    const std::size_t live = causal ? (r % seq) + 1 : n;
    double mx = in[0];
    for (std::size_t j = 1; j < live; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < live; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < live; ++j) o[j] /= sum;
  }
  return finish(std::move(out), "softmax_rows");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t n = x.cols();
  require(eps > 0.0, ErrorKind::Parameter, "layer_norm eps must be positive");
  require(gamma.size() == n && beta.size() == n, ErrorKind::Dimension,
          "layer_norm affine parameters must have " + std::to_string(n) + " elements");
  Tensor out(x.shape(), promote(x.precision(), gamma.precision()));
  const std::size_t rows = x.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.raw() + r * n;
    double* o = out.raw() + r * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += in[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(n);
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) o[j] = (in[j] - mean) * rstd * gamma[j] + beta[j];
  }
  return finish(std::move(out), "layer_norm");
}

Tensor randn(const Shape& shape, Rng& rng, double std, Precision precision) {
  require(std > 0.0, ErrorKind::Parameter, "randn std must be positive");
  Tensor out(shape, precision);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; i += 2) {
    double z0 = 0.0, z1 = 0.0;
    rng.next_normal_pair(z0, z1);
    out[i] = std * z0;
    if (i + 1 < n) out[i + 1] = std * z1;
  }
  out.round_to_precision();
  return out;
}

CrossEntropy cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets) {
  const std::size_t vocab = logits.cols();
  const std::size_t rows = logits.rows();
  require(targets.size() == rows, ErrorKind::Dimension,
          "cross_entropy has " + std::to_string(rows) + " rows but " +
              std::to_string(targets.size()) + " targets");
  CrossEntropy ce;
  ce.dlogits = Tensor(logits.shape(), logits.precision());
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0) continue;
    require(static_cast<std::size_t>(targets[r]) < vocab, ErrorKind::Data,
            "target id " + std::to_string(targets[r]) + " outside vocabulary of " +
                std::to_string(vocab));
    ++ce.counted;
  }
  require(ce.counted > 0, ErrorKind::Data, "cross_entropy with no scored positions");
  const double inv = 1.0 / static_cast<double>(ce.counted);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0) continue;
    const double* in = logits.raw() + r * vocab;
    double* g = ce.dlogits.raw() + r * vocab;
    double mx = in[0];
    for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) {
      g[j] = std::exp(in[j] - mx);
      sum += g[j];
    }
    const auto t = static_cast<std::size_t>(targets[r]);
    total += std::log(sum) + mx - in[t];
    for (std::size_t j = 0; j < vocab; ++j) g[j] = g[j] / sum * inv;
    g[t] -= inv;
  }
  ce.loss = total * inv;
  if (!std::isfinite(ce.loss)) fail(ErrorKind::Numeric, "non-finite cross-entropy loss");
  ce.dlogits = finish(std::move(ce.dlogits), "cross_entropy");
  return ce;
}

}  // namespace lorafa
