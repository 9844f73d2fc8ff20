// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include "rng.hpp"
#include "tensor.hpp"

namespace lorafa {

/// Which weights of a linear layer train.
///
///   FullFineTune  W trains, no adapter
///   LoRA          W frozen, A and B train
///   LoRAFA        W and A frozen, only B trains
///   Frozen        nothing trains
enum class AdaptationMode { FullFineTune, LoRA, LoRAFA, Frozen };

std::string_view to_string(AdaptationMode mode);
/// Accepts "ft", "lora", "lora-fa" (also "lorafa"), "frozen".
AdaptationMode parse_mode(std::string_view text);
bool has_adapter(AdaptationMode mode);

/// Activations a forward call keeps for backward. Shared pointers let several
/// layers reference one stored input (query/key/value read the same tensor).
struct RetainedActivations {
  std::shared_ptr<const Tensor> x_full;  // [b, s, d_in]
  std::shared_ptr<const Tensor> x_low;   // [b, s, r] = x A
};

struct LinearGrads {
  Tensor dx;
  std::optional<Tensor> dW;
  std::optional<Tensor> dA;
  std::optional<Tensor> dB;
};

/// Y = X W + alpha (X A) B, without bias.
class AdaptedLinear {
 public:
  struct Output {
    Tensor y;
    RetainedActivations kept;
  };

  /// Wraps a base weight `w` [d_in x d_out]. In LoRA/LoRAFA modes A is drawn
  /// from N(0, a_std^2) and B starts at zero; alpha defaults to 1/rank.
  /// Rank is ignored for FT and Frozen.
  static AdaptedLinear create(Tensor w, AdaptationMode mode, std::size_t rank, Rng& rng,
                              std::optional<double> alpha = std::nullopt, double a_std = 1.0);

  /// Assembles a layer from explicit tensors (a/b must be present iff the
  /// mode has an adapter).
  static AdaptedLinear from_parts(Tensor w, std::optional<Tensor> a, std::optional<Tensor> b,
                                  AdaptationMode mode, double alpha);

  Output forward(std::shared_ptr<const Tensor> x) const;
  Output forward(const Tensor& x) const { return forward(std::make_shared<const Tensor>(x)); }

  /// Gradients for exactly this mode's trainable set, plus dX. Throws a
  /// retention-policy error if `kept` lacks a tensor the rule needs.
  LinearGrads backward(const RetainedActivations& kept, const Tensor& dy) const;

  /// W + alpha A B. Mode error for FT and Frozen.
  Tensor merge() const;

  /// Elements `forward` keeps for a [b, s, d_in] input (no sharing).
  std::size_t retained_elements(std::size_t batch, std::size_t seq) const;
  std::size_t trainable_count() const;

  AdaptationMode mode() const noexcept { return mode_; }
  std::size_t d_in() const noexcept { return w_.extent(0); }
  std::size_t d_out() const noexcept { return w_.extent(1); }
  std::size_t rank() const noexcept { return rank_; }
  double alpha() const noexcept { return alpha_; }

  const Tensor& w() const noexcept { return w_; }
  const std::optional<Tensor>& a() const noexcept { return a_; }
  const std::optional<Tensor>& b() const noexcept { return b_; }
  Tensor& w_mut() noexcept { return w_; }
  Tensor& a_mut();
  Tensor& b_mut();

 private:
  AdaptedLinear(Tensor w, std::optional<Tensor> a, std::optional<Tensor> b, AdaptationMode mode,
                std::size_t rank, double alpha);

  Tensor w_;
  std::optional<Tensor> a_;
  std::optional<Tensor> b_;
  AdaptationMode mode_;
  std::size_t rank_;
  double alpha_;
};

/// Closed-form retention for one layer: FT -> b s d_in; LoRA -> b s (d_in + r);
/// LoRAFA -> b s r; Frozen -> 0.
std::size_t retained_elements(AdaptationMode mode, std::size_t d_in, std::size_t rank,
                              std::size_t batch, std::size_t seq);

}  // namespace lorafa
