// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "adapters.hpp"

#include <algorithm>
#include <string>

#include "errors.hpp"
#include "ops.hpp"
#include "vjp.hpp"

namespace lorafa {

std::string_view to_string(AdaptationMode mode) {
  switch (mode) {
    case AdaptationMode::FullFineTune: return "ft";
    case AdaptationMode::LoRA: return "lora";
    case AdaptationMode::LoRAFA: return "lora-fa";
    case AdaptationMode::Frozen: return "frozen";
  }
  return "unknown";
}

AdaptationMode parse_mode(std::string_view text) {
  if (text == "ft" || text == "full") return AdaptationMode::FullFineTune;
  if (text == "lora") return AdaptationMode::LoRA;
  if (text == "lora-fa" || text == "lorafa" || text == "lora_fa") return AdaptationMode::LoRAFA;
  if (text == "frozen") return AdaptationMode::Frozen;
  fail(ErrorKind::Parameter, "unknown adaptation mode '" + std::string(text) + "'");
}

bool has_adapter(AdaptationMode mode) {
  return mode == AdaptationMode::LoRA || mode == AdaptationMode::LoRAFA;
}

std::size_t retained_elements(AdaptationMode mode, std::size_t d_in, std::size_t rank,
                              std::size_t batch, std::size_t seq) {
  const std::size_t tokens = batch * seq;
  switch (mode) {
    case AdaptationMode::FullFineTune: return tokens * d_in;
    case AdaptationMode::LoRA: return tokens * (d_in + rank);
    case AdaptationMode::LoRAFA: return tokens * rank;
    case AdaptationMode::Frozen: return 0;
  }
  return 0;
}

AdaptedLinear::AdaptedLinear(Tensor w, std::optional<Tensor> a, std::optional<Tensor> b,
                             AdaptationMode mode, std::size_t rank, double alpha)
    : w_(std::move(w)), a_(std::move(a)), b_(std::move(b)), mode_(mode), rank_(rank), alpha_(alpha) {}

AdaptedLinear AdaptedLinear::create(Tensor w, AdaptationMode mode, std::size_t rank, Rng& rng,
                                    std::optional<double> alpha, double a_std) {
  require(w.dims() == 2, ErrorKind::Dimension, "weight must be a matrix, got " + to_string(w.shape()));
  if (!has_adapter(mode)) return AdaptedLinear(std::move(w), std::nullopt, std::nullopt, mode, 0, 1.0);

  const std::size_t d_in = w.extent(0);
  const std::size_t d_out = w.extent(1);
  require(rank >= 1, ErrorKind::Parameter, "adapter rank must be >= 1");
  require(rank <= std::min(d_in, d_out), ErrorKind::Parameter,
          "adapter rank " + std::to_string(rank) + " exceeds min(d_in, d_out) = " +
              std::to_string(std::min(d_in, d_out)));
  const double scale_alpha = alpha.value_or(1.0 / static_cast<double>(rank));
  require(scale_alpha > 0.0, ErrorKind::Parameter, "alpha must be positive");
  require(a_std > 0.0, ErrorKind::Parameter, "a_std must be positive");

  Tensor a = randn({d_in, rank}, rng, a_std, w.precision());
  Tensor b({rank, d_out}, w.precision());
  return AdaptedLinear(std::move(w), std::move(a), std::move(b), mode, rank, scale_alpha);
}

AdaptedLinear AdaptedLinear::from_parts(Tensor w, std::optional<Tensor> a, std::optional<Tensor> b,
                                        AdaptationMode mode, double alpha) {
  require(w.dims() == 2, ErrorKind::Dimension, "weight must be a matrix, got " + to_string(w.shape()));
  if (!has_adapter(mode)) {
    require(!a && !b, ErrorKind::Mode,
            std::string(to_string(mode)) + " layers carry no adapter tensors");
    return AdaptedLinear(std::move(w), std::nullopt, std::nullopt, mode, 0, 1.0);
  }
  require(a.has_value() && b.has_value(), ErrorKind::Mode,
          std::string(to_string(mode)) + " layers need both A and B");
  const std::size_t rank = a->cols();
  require(a->shape() == Shape{w.extent(0), rank} && b->shape() == Shape{rank, w.extent(1)},
          ErrorKind::Dimension,
          "adapter shapes " + to_string(a->shape()) + ", " + to_string(b->shape()) +
              " do not fit weight " + to_string(w.shape()));
  require(rank <= std::min(w.extent(0), w.extent(1)), ErrorKind::Parameter,
          "adapter rank exceeds min(d_in, d_out)");
  require(alpha > 0.0, ErrorKind::Parameter, "alpha must be positive");
  return AdaptedLinear(std::move(w), std::move(a), std::move(b), mode, rank, alpha);
}

Tensor& AdaptedLinear::a_mut() {
  require(a_.has_value(), ErrorKind::Mode, "layer has no adapter A");
  return *a_;
}

Tensor& AdaptedLinear::b_mut() {
  require(b_.has_value(), ErrorKind::Mode, "layer has no adapter B");
  return *b_;
}

AdaptedLinear::Output AdaptedLinear::forward(std::shared_ptr<const Tensor> x) const {
  require(x && x->dims() >= 2 && x->cols() == d_in(), ErrorKind::Dimension,
          "linear input " + (x ? to_string(x->shape()) : std::string("<null>")) +
              " does not end in d_in = " + std::to_string(d_in()));
  Output out;
  out.y = matmul(*x, w_);
  switch (mode_) {
    case AdaptationMode::Frozen:
      break;
    case AdaptationMode::FullFineTune:
      out.kept.x_full = std::move(x);
      break;
    case AdaptationMode::LoRA: {
      auto low = std::make_shared<const Tensor>(matmul(*x, *a_));
      axpy_inplace(out.y, alpha_, matmul(*low, *b_));
      out.kept.x_low = std::move(low);
      out.kept.x_full = std::move(x);
      break;
    }
    case AdaptationMode::LoRAFA: {
      // Only the rank-r projection survives the call; x is released here.
      auto low = std::make_shared<const Tensor>(matmul(*x, *a_));
      axpy_inplace(out.y, alpha_, matmul(*low, *b_));
      out.kept.x_low = std::move(low);
      break;
    }
  }
  return out;
}

LinearGrads AdaptedLinear::backward(const RetainedActivations& kept, const Tensor& dy) const {
  require(dy.dims() >= 2 && dy.cols() == d_out(), ErrorKind::Dimension,
          "upstream gradient " + to_string(dy.shape()) + " does not end in d_out = " +
              std::to_string(d_out()));
  LinearGrads grads;
  const bool trains_w = mode_ == AdaptationMode::FullFineTune;

  SavedInputs base;
  base.borrow("b", w_);
  if (kept.x_full) base.keep("a", kept.x_full);
  auto base_grads = vjp(OpKind::MatMul, base, dy, {true, trains_w});
  grads.dx = std::move(*base_grads[0]);
  if (trains_w) grads.dW = std::move(base_grads[1]);

  if (!has_adapter(mode_)) return grads;

  // z = (x A) B,  y += alpha z
  const Tensor dz = scale(dy, alpha_);
  SavedInputs up;
  up.borrow("b", *b_);
  if (kept.x_low) up.keep("a", kept.x_low);
  auto up_grads = vjp(OpKind::MatMul, up, dz, {true, true});
  grads.dB = std::move(up_grads[1]);

  const bool trains_a = mode_ == AdaptationMode::LoRA;
  SavedInputs down;
  down.borrow("b", *a_);
  if (kept.x_full) down.keep("a", kept.x_full);
  auto down_grads = vjp(OpKind::MatMul, down, *up_grads[0], {true, trains_a});
  axpy_inplace(grads.dx, 1.0, *down_grads[0]);
  if (trains_a) grads.dA = std::move(down_grads[1]);
  return grads;
}

Tensor AdaptedLinear::merge() const {
  require(has_adapter(mode_), ErrorKind::Mode,
          "merge is defined for lora and lora-fa layers, not " + std::string(to_string(mode_)));
  Tensor merged = w_;
  axpy_inplace(merged, alpha_, matmul(*a_, *b_));
  return merged;
}

std::size_t AdaptedLinear::retained_elements(std::size_t batch, std::size_t seq) const {
  return lorafa::retained_elements(mode_, d_in(), rank_, batch, seq);
}

std::size_t AdaptedLinear::trainable_count() const {
  switch (mode_) {
    case AdaptationMode::FullFineTune: return w_.size();
    case AdaptationMode::LoRA: return a_->size() + b_->size();
    case AdaptationMode::LoRAFA: return b_->size();
    case AdaptationMode::Frozen: return 0;
  }
  return 0;
}

}  // namespace lorafa
