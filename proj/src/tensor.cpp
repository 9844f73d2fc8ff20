// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "errors.hpp"

namespace lorafa {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  require(!shape.empty(), ErrorKind::Dimension, "tensor needs at least one dimension");
  for (auto e : shape)
    require(e > 0, ErrorKind::Dimension, "zero extent in shape " + to_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, Precision precision)
    : shape_(std::move(shape)), precision_(precision) {
  validate_shape(shape_);
  values_.assign(element_count(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values, Precision precision)
    : shape_(std::move(shape)), values_(std::move(values)), precision_(precision) {
  validate_shape(shape_);
  require(values_.size() == element_count(shape_), ErrorKind::Dimension,
          "element count " + std::to_string(values_.size()) + " does not match shape " +
              to_string(shape_));
  round_to_precision();
}

Tensor Tensor::full(Shape shape, double value, Precision precision) {
  Tensor t(std::move(shape), precision);
  std::fill(t.values_.begin(), t.values_.end(), value);
  t.round_to_precision();
  return t;
}

Tensor Tensor::identity(std::size_t n, Precision precision) {
  Tensor t({n, n}, precision);
  for (std::size_t i = 0; i < n; ++i) t.values_[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      Precision precision) {
  const std::size_t m = rows.size();
  require(m > 0, ErrorKind::Dimension, "empty matrix literal");
  const std::size_t n = rows.begin()->size();
  std::vector<double> values;
  values.reserve(m * n);
  for (const auto& row : rows) {
    require(row.size() == n, ErrorKind::Dimension, "ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(values), precision);
}

std::size_t Tensor::extent(std::size_t axis) const {
  require(axis < shape_.size(), ErrorKind::Dimension, "axis out of range");
  return shape_[axis];
}

std::size_t Tensor::cols() const {
  require(!shape_.empty(), ErrorKind::Dimension, "cols() of empty tensor");
  return shape_.back();
}

std::size_t Tensor::rows() const { return cols() == 0 ? 0 : values_.size() / cols(); }

double& Tensor::at(std::size_t row, std::size_t col) { return values_[row * cols() + col]; }
double Tensor::at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  validate_shape(shape);
  require(element_count(shape) == values_.size(), ErrorKind::Dimension,
          "cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor Tensor::to(Precision precision) const {
  Tensor copy = *this;
  copy.precision_ = precision;
  copy.round_to_precision();
  return copy;
}

void Tensor::round_to_precision() {
  if (precision_ != Precision::F32) return;
  for (auto& v : values_) v = static_cast<double>(static_cast<float>(v));
}

void Tensor::check_finite(const char* context) const {
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, std::string("non-finite value produced by ") + context);
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  return a.values_.empty() ||
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorKind::Dimension,
          "max_abs_diff " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double frobenius_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace lorafa
