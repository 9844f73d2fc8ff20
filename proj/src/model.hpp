// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adapters.hpp"
#include "tensor.hpp"

namespace lorafa {

struct ModelConfig {
  std::size_t d = 64;        // hidden size
  std::size_t layers = 2;    // transformer blocks
  std::size_t heads = 4;
  std::size_t d_ff = 0;      // FFN width; 0 means 4d
  std::size_t vocab = 32;
  std::size_t seq_len = 16;
  std::size_t batch = 8;

  std::size_t ffn_dim() const { return d_ff == 0 ? 4 * d : d_ff; }
  void validate() const;
};

struct AdapterOptions {
  AdaptationMode mode = AdaptationMode::LoRAFA;
  std::size_t rank = 8;
  std::optional<double> alpha;  // default 1/rank
  double a_std = 1.0;
};

/// Gradients keyed by parameter name; holds entries only for trainable
/// parameters.
using GradientSet = std::map<std::string, Tensor>;

struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<std::int32_t> tokens;   // [batch * seq]
  std::vector<std::int32_t> targets;  // [batch * seq], -1 = not scored
};

struct TrainableCount {
  std::size_t linear_only = 0;  // adapted linear layers only
  std::size_t full = 0;         // plus embeddings and layernorm
};

enum class RetainedCategory { LinearInputFull, LinearInputLowRank, Other };

struct RetainedEntry {
  std::string owner;
  RetainedCategory category;
  const Tensor* tensor;
};

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;
};

struct BlockTape {
  std::shared_ptr<const Tensor> h_in;  // LN1 input
  RetainedActivations q, k, v, o, up, down;
  std::shared_ptr<const Tensor> qh, kh, vh;  // [b*H, s, dh]
  std::shared_ptr<const Tensor> probs;       // [b*H, s, s]
  std::shared_ptr<const Tensor> h_mid;       // LN2 input
  std::shared_ptr<const Tensor> ffn_pre;     // GeLU input
};

/// Everything a forward pass keeps for the matching backward.
struct Tape {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<std::int32_t> tokens;
  std::vector<BlockTape> blocks;
  std::shared_ptr<const Tensor> h_last;     // final LN input
  std::shared_ptr<const Tensor> head_in;    // final LN output (FT only)
  std::shared_ptr<const Tensor> dlogits;    // cross-entropy gradient

  /// Every retained tensor with its owner; shared tensors appear once per
  /// owner.
  std::vector<RetainedEntry> retained() const;
};

struct ParameterRef {
  std::string name;
  Tensor* value;
  bool trainable;
};

struct NamedLayer {
  std::string name;
  const AdaptedLinear* layer;
};

/// Pre-LN decoder-only transformer. Token embedding is tied to the output
/// head; positions use fixed sinusoidal encodings. Every block has query,
/// key, value and output projections plus a two-layer GeLU FFN, all of them
/// AdaptedLinear layers in the model's mode.
class TransformerModel {
 public:
  static TransformerModel build(const ModelConfig& config, const AdapterOptions& adapter,
                                std::uint64_t seed);

  struct ForwardResult {
    double loss = 0.0;
    Tape tape;
  };

  ForwardResult forward_loss(const TokenBatch& batch) const;
  /// Gradients for exactly the trainable set.
  GradientSet backward(const Tape& tape) const;
  /// [batch, seq, vocab]
  Tensor logits(const TokenBatch& batch) const;

  TrainableCount count_trainable() const;

  std::vector<ParameterRef> parameters();
  std::vector<ParameterRef> trainable_parameters();
  std::vector<NamedLayer> adapted_layers() const;
  AdaptedLinear& layer(const std::string& name);
  const AdaptedLinear& layer(const std::string& name) const;

  const ModelConfig& config() const noexcept { return config_; }
  AdaptationMode mode() const noexcept { return mode_; }
  std::size_t rank() const noexcept { return rank_; }
  double alpha() const noexcept { return alpha_; }

  /// Copy with every adapter folded into its base weight, in Frozen mode.
  TransformerModel merged() const;

  /// Fresh adapters of the requested mode over this model's base weights
  /// (adapters already present are folded in first). Adapter tensors come
  /// from the same stream `build` uses for `seed`.
  TransformerModel with_adapters(const AdapterOptions& adapter, std::uint64_t seed) const;

 private:
  struct Block {
    LayerNormParams ln1, ln2;
    AdaptedLinear q, k, v, o, up, down;
  };

  struct Hidden;
  Hidden run_forward(const TokenBatch& batch, Tape* tape) const;
  void check_batch(const TokenBatch& batch) const;
  bool trains_dense() const { return mode_ == AdaptationMode::FullFineTune; }

  TransformerModel(ModelConfig config, AdaptationMode mode, std::size_t rank, double alpha,
                   Tensor embed, std::vector<Block> blocks, LayerNormParams ln_f);

  ModelConfig config_;
  AdaptationMode mode_;
  std::size_t rank_;
  double alpha_;
  Tensor embed_;       // [vocab, d]
  Tensor positions_;   // [seq_len, d], fixed
  std::vector<Block> blocks_;
  LayerNormParams ln_f_;
};

/// Closed-form trainable counts: linear-only is L(4d^2 + 2 d d_ff) for FT,
/// L r (8d + 2(d + d_ff)) for LoRA and L r (4d + d_ff + d) for LoRA-FA,
/// i.e. 12d^2L, 18drL and 9drL at d_ff = 4d.
TrainableCount count_trainable_formula(const ModelConfig& config, AdaptationMode mode,
                                       std::size_t rank);

/// Names of the six adapted layers of block `l`, in forward order.
std::vector<std::string> block_layer_names(std::size_t l);

constexpr double kLayerNormEps = 1e-5;

}  // namespace lorafa
