// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "model.hpp"

namespace lorafa {

struct SgdConfig {
  double eta = 1e-2;
  void validate() const;
};

struct AdamWConfig {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  void validate() const;
};

/// p <- p - eta g for every parameter that has a gradient. Parameters
/// without one are untouched; a gradient without a parameter is an error.
void sgd_step(const std::vector<ParameterRef>& params, const GradientSet& grads,
              const SgdConfig& cfg);

/// First and second moments, allocated lazily per parameter that receives a
/// gradient (so frozen parameters never get state).
class AdamWState {
 public:
  struct Moments {
    Tensor m;
    Tensor v;
  };

  std::int64_t step() const noexcept { return step_; }
  std::size_t element_count() const;
  const std::map<std::string, Moments>& moments() const noexcept { return moments_; }

 private:
  friend void adamw_step(const std::vector<ParameterRef>&, const GradientSet&, AdamWState&,
                         const AdamWConfig&);
  std::int64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

/// Decoupled weight decay with bias-corrected moments:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   p -= eta (m_hat / (sqrt(v_hat) + eps) + wd p)
void adamw_step(const std::vector<ParameterRef>& params, const GradientSet& grads,
                AdamWState& state, const AdamWConfig& cfg);

}  // namespace lorafa
