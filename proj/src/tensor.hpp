// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lorafa {

using Shape = std::vector<std::size_t>;

/// Compute precision of a tensor. Elements are always held as doubles; a
/// F32 tensor keeps every element exactly representable in binary32 and
/// every operation producing a F32 tensor rounds its results on store.
enum class Precision { F64, F32 };

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/// Dense row-major n-dimensional array. Value semantics throughout.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Precision precision = Precision::F64);
  Tensor(Shape shape, std::vector<double> values,
         Precision precision = Precision::F64);

  static Tensor zeros(Shape shape, Precision precision = Precision::F64) {
    return Tensor(std::move(shape), precision);
  }
  static Tensor full(Shape shape, double value,
                     Precision precision = Precision::F64);
  static Tensor identity(std::size_t n, Precision precision = Precision::F64);
  /// 2-D tensor from nested rows, e.g. `Tensor::matrix({{1, 2}, {3, 4}})`.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       Precision precision = Precision::F64);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dims() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  Precision precision() const noexcept { return precision_; }

  /// Extent of the trailing dimension.
  std::size_t cols() const;
  /// Product of all leading extents (everything but the trailing one).
  std::size_t rows() const;

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  double* raw() noexcept { return values_.data(); }
  const double* raw() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t row, std::size_t col);
  double at(std::size_t row, std::size_t col) const;

  /// Same elements, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;
  /// Folds all leading dimensions into one: [.., n] -> [rows, n].
  Tensor as_matrix() const { return reshaped({rows(), cols()}); }

  /// Converts to the given precision (rounding when narrowing).
  Tensor to(Precision precision) const;

  /// Rounds every element to the tensor's precision; no-op for F64.
  void round_to_precision();

  /// Throws a numeric error naming `context` if any element is NaN or Inf.
  void check_finite(const char* context) const;

  /// Shape and every element equal bit-for-bit.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::vector<double> values_;
  Precision precision_ = Precision::F64;
};

/// Precision of a binary op's result: F32 if either side is F32.
inline Precision promote(Precision a, Precision b) {
  return (a == Precision::F32 || b == Precision::F32) ? Precision::F32
                                                      : Precision::F64;
}

double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& t);

}  // namespace lorafa
