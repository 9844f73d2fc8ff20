// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "optim.hpp"

#include <cmath>

#include "errors.hpp"
#include "ops.hpp"

namespace lorafa {

namespace {

Tensor& find_param(const std::vector<ParameterRef>& params, const std::string& name,
                   const Tensor& grad) {
  for (const auto& p : params) {
    if (p.name != name) continue;
    require(p.value->shape() == grad.shape(), ErrorKind::Dimension,
            "gradient for '" + name + "' has shape " + to_string(grad.shape()) +
                " but parameter has " + to_string(p.value->shape()));
    return *p.value;
  }
  fail(ErrorKind::State, "gradient '" + name + "' has no matching parameter");
}

}  // namespace

void SgdConfig::validate() const {
  require(eta > 0.0, ErrorKind::Parameter, "learning rate must be positive");
}

void AdamWConfig::validate() const {
  require(eta > 0.0, ErrorKind::Parameter, "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::Parameter,
          "AdamW betas must lie in [0, 1)");
  require(eps > 0.0, ErrorKind::Parameter, "AdamW eps must be positive");
  require(weight_decay >= 0.0, ErrorKind::Parameter, "weight decay must be non-negative");
}

void sgd_step(const std::vector<ParameterRef>& params, const GradientSet& grads,
              const SgdConfig& cfg) {
  cfg.validate();
  for (const auto& [name, g] : grads) axpy_inplace(find_param(params, name, g), -cfg.eta, g);
}

std::size_t AdamWState::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, mv] : moments_) n += mv.m.size() + mv.v.size();
  return n;
}

void adamw_step(const std::vector<ParameterRef>& params, const GradientSet& grads,
                AdamWState& state, const AdamWConfig& cfg) {
  cfg.validate();
  require(state.step_ >= 0, ErrorKind::State, "negative optimizer step counter");
  for (const auto& [name, mv] : state.moments_)
    require(grads.count(name) == 1, ErrorKind::State,
            "optimizer state for '" + name + "' but no gradient this step");

  const std::int64_t t = state.step_ + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (const auto& [name, g] : grads) {
    Tensor& p = find_param(params, name, g);
    auto it = state.moments_.find(name);
    if (it == state.moments_.end()) {
      require(state.step_ == 0, ErrorKind::State,
              "parameter '" + name + "' appeared after optimizer step 0");
      it = state.moments_.emplace(name, AdamWState::Moments{Tensor(g.shape()), Tensor(g.shape())})
               .first;
    }
    auto& [m, v] = it->second;
    require(m.shape() == p.shape() && v.shape() == p.shape(), ErrorKind::State,
            "optimizer moments for '" + name + "' do not match the parameter shape");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= cfg.eta * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p[i]);
    }
    p.round_to_precision();
    p.check_finite("adamw update");
  }
  state.step_ = t;
}

}  // namespace lorafa
