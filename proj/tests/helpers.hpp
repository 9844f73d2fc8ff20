// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <functional>
#include <vector>

#include "fd_oracle.hpp"
#include "ops.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace testing {

using lorafa::Shape;
using lorafa::Tensor;

inline Tensor random(const Shape& shape, lorafa::Rng& rng, double std = 1.0) {
  return lorafa::randn(shape, rng, std);
}

/// sum(out * weight): a scalar whose gradient w.r.t. `out` is `weight`.
inline double contract(const Tensor& out, const Tensor& weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weight[i];
  return s;
}

/// Relative error between an analytic gradient and central differences of
/// `loss` with respect to every entry of `x`.
inline double check_against_fd(Tensor& x, const Tensor& analytic,
                               const std::function<double()>& loss) {
  const auto numeric = fd::gradient(x.raw(), x.size(), loss);
  return fd::rel_error(analytic.raw(), numeric.data(), x.size());
}

}  // namespace testing
