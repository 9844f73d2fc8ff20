// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "linalg.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "ops.hpp"

namespace lorafa {

namespace {

// Column-major working copy; Householder reflections act on columns.
struct ColumnMatrix {
  std::size_t rows, cols;
  std::vector<double> v;
  double& operator()(std::size_t i, std::size_t j) { return v[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return v[j * rows + i]; }
};

ColumnMatrix to_columns(const Tensor& m) {
  ColumnMatrix c{m.rows(), m.cols(), std::vector<double>(m.size())};
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) c(i, j) = m.at(i, j);
  return c;
}

// Builds the reflector for column k below the diagonal. Returns false when the
// column is already zero there (reflection is the identity). On success `v`
// holds the unnormalized reflector and `alpha` the new diagonal value.
bool make_reflector(const ColumnMatrix& a, std::size_t k, std::vector<double>& v, double& alpha) {
  double norm2 = 0.0;
  for (std::size_t i = k; i < a.rows; ++i) norm2 += a(i, k) * a(i, k);
  if (norm2 == 0.0) {
    alpha = 0.0;
    return false;
  }
  const double x0 = a(k, k);
  alpha = (x0 >= 0.0 ? -1.0 : 1.0) * std::sqrt(norm2);
  v.assign(a.rows, 0.0);
  for (std::size_t i = k; i < a.rows; ++i) v[i] = a(i, k);
  v[k] -= alpha;
  return true;
}

// a[k:, j] -= 2 v (v^T a[k:, j]) / (v^T v) for columns j in [from, cols).
void reflect(ColumnMatrix& a, const std::vector<double>& v, std::size_t k, std::size_t from) {
  double vv = 0.0;
  for (std::size_t i = k; i < a.rows; ++i) vv += v[i] * v[i];
  for (std::size_t j = from; j < a.cols; ++j) {
    double dot = 0.0;
    for (std::size_t i = k; i < a.rows; ++i) dot += v[i] * a(i, j);
    const double f = 2.0 * dot / vv;
    for (std::size_t i = k; i < a.rows; ++i) a(i, j) -= f * v[i];
  }
}

}  // namespace

QrResult qr(const Tensor& m) {
  require(m.dims() == 2, ErrorKind::Dimension, "qr expects a matrix, got " + to_string(m.shape()));
  const std::size_t d = m.extent(0);
  const std::size_t r = m.extent(1);
  require(d >= r, ErrorKind::Dimension,
          "qr needs rows >= cols, got " + to_string(m.shape()));

  ColumnMatrix a = to_columns(m);
  std::vector<std::vector<double>> reflectors(r);
  std::vector<bool> active(r, false);
  for (std::size_t k = 0; k < r; ++k) {
    double alpha = 0.0;
    if (!make_reflector(a, k, reflectors[k], alpha)) continue;
    active[k] = true;
    reflect(a, reflectors[k], k, k + 1);
    a(k, k) = alpha;
    for (std::size_t i = k + 1; i < d; ++i) a(i, k) = 0.0;
  }

  // Q = H_0 ... H_{r-1} [I_r; 0]
  ColumnMatrix q{d, r, std::vector<double>(d * r, 0.0)};
  for (std::size_t j = 0; j < r; ++j) q(j, j) = 1.0;
  for (std::size_t k = r; k-- > 0;)
    if (active[k]) reflect(q, reflectors[k], k, 0);

  QrResult out{Tensor({d, r}, m.precision()), Tensor({r, r}, m.precision())};
  for (std::size_t j = 0; j < r; ++j) {
    const double sign = a(j, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) out.q.at(i, j) = sign * q(i, j);
    for (std::size_t c = j; c < r; ++c) out.rr.at(j, c) = sign * a(j, c);
  }
  out.q.round_to_precision();
  out.rr.round_to_precision();
  return out;
}

std::vector<double> pivoted_qr_diagonal(const Tensor& m) {
  require(m.dims() == 2, ErrorKind::Dimension, "rank expects a matrix, got " + to_string(m.shape()));
  ColumnMatrix a = to_columns(m.extent(0) >= m.extent(1) ? m : transpose(m));
  const std::size_t steps = a.cols;
  std::vector<double> diag;
  diag.reserve(steps);
  std::vector<double> v;
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < a.cols; ++j) {
      double n2 = 0.0;
      for (std::size_t i = k; i < a.rows; ++i) n2 += a(i, j) * a(i, j);
      if (n2 > best_norm) {
        best_norm = n2;
        best = j;
      }
    }
    if (best != k)
      for (std::size_t i = 0; i < a.rows; ++i) std::swap(a(i, k), a(i, best));
    double alpha = 0.0;
    if (make_reflector(a, k, v, alpha)) reflect(a, v, k, k + 1);
    diag.push_back(std::abs(alpha));
  }
  return diag;
}

std::size_t numerical_rank(const Tensor& m, double threshold) {
  const auto diag = pivoted_qr_diagonal(m);
  return static_cast<std::size_t>(
      std::count_if(diag.begin(), diag.end(), [&](double x) { return x > threshold; }));
}

std::size_t numerical_rank_relative(const Tensor& m, double relative) {
  const auto diag = pivoted_qr_diagonal(m);
  if (diag.empty() || diag.front() == 0.0) return 0;
  const double threshold = relative * diag.front();
  return static_cast<std::size_t>(
      std::count_if(diag.begin(), diag.end(), [&](double x) { return x > threshold; }));
}

}  // namespace lorafa
