// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "vjp.hpp"

#include <cmath>

#include "errors.hpp"
#include "ops.hpp"

namespace lorafa {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Scale: return "scale";
    case OpKind::Gelu: return "gelu";
    case OpKind::SoftmaxRows: return "softmax_rows";
    case OpKind::LayerNorm: return "layer_norm";
  }
  return "unknown";
}

SavedInputs& SavedInputs::keep(std::string slot, std::shared_ptr<const Tensor> tensor) {
  slots_.emplace_back(std::move(slot), std::move(tensor));
  return *this;
}

SavedInputs& SavedInputs::keep(std::string slot, const Tensor& tensor) {
  return keep(std::move(slot), std::make_shared<const Tensor>(tensor));
}

SavedInputs& SavedInputs::borrow(std::string slot, const Tensor& tensor) {
  return keep(std::move(slot), std::shared_ptr<const Tensor>(std::shared_ptr<const Tensor>{}, &tensor));
}

bool SavedInputs::has(std::string_view slot) const {
  for (const auto& [name, t] : slots_)
    if (name == slot && t) return true;
  return false;
}

const Tensor& SavedInputs::get(OpKind kind, std::string_view slot) const {
  for (const auto& [name, t] : slots_)
    if (name == slot && t) return *t;
  fail(ErrorKind::Retention, std::string(to_string(kind)) + " backward needs saved input '" +
                                 std::string(slot) + "' which was not retained");
}

namespace {

bool want(const std::vector<bool>& wanted, std::size_t i) { return i < wanted.size() && wanted[i]; }

// Sums `grad` over broadcast leading dims down to `target` shape.
Tensor reduce_to(const Tensor& grad, const Shape& target) {
  if (target.empty() || grad.shape() == target) return grad;
  Tensor out(target, grad.precision());
  const std::size_t inner = out.size();
  for (std::size_t i = 0; i < grad.size(); ++i) out[i % inner] += grad[i];
  out.round_to_precision();
  return out;
}

std::vector<std::optional<Tensor>> matmul_vjp(const SavedInputs& saved, const Tensor& up,
                                              const std::vector<bool>& wanted, bool batched) {
  std::vector<std::optional<Tensor>> grads(2);
  if (want(wanted, 0)) {
    const Tensor& b = saved.get(OpKind::MatMul, "b");
    grads[0] = matmul_nt(up, b);
  }
  if (want(wanted, 1)) {
    const Tensor& a = saved.get(OpKind::MatMul, "a");
    grads[1] = batched ? batched_matmul_tn(a, up) : matmul_tn(a, up);
  }
  return grads;
}

std::vector<std::optional<Tensor>> layer_norm_vjp(const SavedInputs& saved, const Tensor& up,
                                                  const std::vector<bool>& wanted, double eps) {
  std::vector<std::optional<Tensor>> grads(3);
  const std::size_t n = up.cols();
  const std::size_t rows = up.rows();
  if (want(wanted, 2)) {
    Tensor dbeta({n}, up.precision());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < n; ++j) dbeta[j] += up[r * n + j];
    dbeta.round_to_precision();
    grads[2] = std::move(dbeta);
  }
  if (!want(wanted, 0) && !want(wanted, 1)) return grads;

  const Tensor& x = saved.get(OpKind::LayerNorm, "x");
  require(x.shape() == up.shape(), ErrorKind::Dimension, "layer_norm upstream shape mismatch");
  const Tensor* gamma = want(wanted, 0) ? &saved.get(OpKind::LayerNorm, "gamma") : nullptr;
  Tensor dx(x.shape(), up.precision());
  Tensor dgamma({n}, up.precision());
  std::vector<double> xhat(n), dxhat(n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.raw() + r * n;
    const double* g = up.raw() + r * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += in[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(n);
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) xhat[j] = (in[j] - mean) * rstd;
    if (want(wanted, 1))
      for (std::size_t j = 0; j < n; ++j) dgamma[j] += g[j] * xhat[j];
    if (gamma) {
      double mean_d = 0.0, mean_dx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        dxhat[j] = g[j] * (*gamma)[j];
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * xhat[j];
      }
      mean_d /= static_cast<double>(n);
      mean_dx /= static_cast<double>(n);
      double* o = dx.raw() + r * n;
      for (std::size_t j = 0; j < n; ++j) o[j] = rstd * (dxhat[j] - mean_d - xhat[j] * mean_dx);
    }
  }
  if (gamma) {
    dx.round_to_precision();
    dx.check_finite("layer_norm backward");
    grads[0] = std::move(dx);
  }
  if (want(wanted, 1)) {
    dgamma.round_to_precision();
    grads[1] = std::move(dgamma);
  }
  return grads;
}

}  // namespace

std::vector<std::optional<Tensor>> vjp(OpKind kind, const SavedInputs& saved,
                                       const Tensor& upstream, const std::vector<bool>& wanted,
                                       const OpAttrs& attrs) {
  switch (kind) {
    case OpKind::MatMul:
      return matmul_vjp(saved, upstream, wanted, attrs.batched);
    case OpKind::Add: {
      std::vector<std::optional<Tensor>> grads(2);
      if (want(wanted, 0)) grads[0] = reduce_to(upstream, attrs.lhs_shape);
      if (want(wanted, 1)) grads[1] = reduce_to(upstream, attrs.rhs_shape);
      return grads;
    }
    case OpKind::Scale: {
      std::vector<std::optional<Tensor>> grads(1);
      if (want(wanted, 0)) grads[0] = scale(upstream, attrs.factor);
      return grads;
    }
    case OpKind::Gelu: {
      std::vector<std::optional<Tensor>> grads(1);
      if (!want(wanted, 0)) return grads;
      const Tensor& x = saved.get(kind, "x");
      require(x.shape() == upstream.shape(), ErrorKind::Dimension, "gelu upstream shape mismatch");
      Tensor dx(x.shape(), promote(x.precision(), upstream.precision()));
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] = upstream[i] * gelu_derivative(x[i]);
      dx.round_to_precision();
      dx.check_finite("gelu backward");
      grads[0] = std::move(dx);
      return grads;
    }
    case OpKind::SoftmaxRows: {
      std::vector<std::optional<Tensor>> grads(1);
      if (!want(wanted, 0)) return grads;
      const Tensor& y = saved.get(kind, "y");
      require(y.shape() == upstream.shape(), ErrorKind::Dimension,
              "softmax upstream shape mismatch");
      const std::size_t n = y.cols();
      Tensor dx(y.shape(), promote(y.precision(), upstream.precision()));
      for (std::size_t r = 0; r < y.rows(); ++r) {
        const double* py = y.raw() + r * n;
        const double* pu = upstream.raw() + r * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += py[j] * pu[j];
        double* o = dx.raw() + r * n;
        for (std::size_t j = 0; j < n; ++j) o[j] = py[j] * (pu[j] - dot);
      }
      dx.round_to_precision();
      dx.check_finite("softmax backward");
      grads[0] = std::move(dx);
      return grads;
    }
    case OpKind::LayerNorm:
      return layer_norm_vjp(saved, upstream, wanted, attrs.eps);
  }
  fail(ErrorKind::Parameter, "unknown op kind");
}

}  // namespace lorafa
