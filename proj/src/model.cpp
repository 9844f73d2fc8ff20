// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "model.hpp"

#include <cmath>
#include <utility>

#include "errors.hpp"
#include "ops.hpp"
#include "vjp.hpp"

namespace lorafa {

namespace {

// Pretrained stand-in initialization.
constexpr double kEmbedStd = 0.5;

Tensor sinusoidal_positions(std::size_t seq, std::size_t d) {
  Tensor pe({seq, d});
  for (std::size_t pos = 0; pos < seq; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe.at(pos, i) = std::sin(static_cast<double>(pos) * freq);
      if (i + 1 < d) pe.at(pos, i + 1) = std::cos(static_cast<double>(pos) * freq);
    }
  }
  return pe;
}

LayerNormParams fresh_layer_norm(std::size_t d) {
  return {Tensor::full({d}, 1.0), Tensor({d})};
}

// [b, s, H*dh] -> [b*H, s, dh]
Tensor split_heads(const Tensor& x, std::size_t heads) {
  const std::size_t b = x.extent(0), s = x.extent(1), d = x.extent(2), dh = d / heads;
  Tensor out({b * heads, s, dh}, x.precision());
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t t = 0; t < s; ++t)
      for (std::size_t h = 0; h < heads; ++h) {
        const double* src = x.raw() + (bi * s + t) * d + h * dh;
        double* dst = out.raw() + ((bi * heads + h) * s + t) * dh;
        for (std::size_t j = 0; j < dh; ++j) dst[j] = src[j];
      }
  return out;
}

// [b*H, s, dh] -> [b, s, H*dh]
Tensor merge_heads(const Tensor& x, std::size_t heads) {
  const std::size_t bh = x.extent(0), s = x.extent(1), dh = x.extent(2), b = bh / heads;
  const std::size_t d = heads * dh;
  Tensor out({b, s, d}, x.precision());
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t t = 0; t < s; ++t)
      for (std::size_t h = 0; h < heads; ++h) {
        const double* src = x.raw() + ((bi * heads + h) * s + t) * dh;
        double* dst = out.raw() + (bi * s + t) * d + h * dh;
        for (std::size_t j = 0; j < dh; ++j) dst[j] = src[j];
      }
  return out;
}

std::shared_ptr<const Tensor> share(Tensor t) { return std::make_shared<const Tensor>(std::move(t)); }

}  // namespace

void ModelConfig::validate() const {
  require(d >= 1 && layers >= 1 && heads >= 1 && vocab >= 1 && seq_len >= 1 && batch >= 1,
          ErrorKind::Parameter, "model extents must all be >= 1");
  require(d % heads == 0, ErrorKind::Parameter,
          "d = " + std::to_string(d) + " is not divisible by heads = " + std::to_string(heads));
}

std::vector<std::string> block_layer_names(std::size_t l) {
  const std::string p = "blocks." + std::to_string(l) + ".";
  return {p + "attn.q", p + "attn.k", p + "attn.v", p + "attn.o", p + "ffn.up", p + "ffn.down"};
}

TransformerModel::TransformerModel(ModelConfig config, AdaptationMode mode, std::size_t rank,
                                   double alpha, Tensor embed, std::vector<Block> blocks,
                                   LayerNormParams ln_f)
    : config_(config),
      mode_(mode),
      rank_(rank),
      alpha_(alpha),
      embed_(std::move(embed)),
      positions_(sinusoidal_positions(config.seq_len, config.d)),
      blocks_(std::move(blocks)),
      ln_f_(std::move(ln_f)) {}

TransformerModel TransformerModel::build(const ModelConfig& config, const AdapterOptions& adapter,
                                         std::uint64_t seed) {
  config.validate();
  const bool adapted = has_adapter(adapter.mode);
  if (adapted)
    require(adapter.rank >= 1 && adapter.rank <= config.d, ErrorKind::Parameter,
            "rank " + std::to_string(adapter.rank) + " must lie in [1, d = " +
                std::to_string(config.d) + "]");

  // Separate streams: base weights do not depend on the mode or rank, so
  // models built with one seed share W across modes.
  Rng root(seed);
  Rng base = root.derive("base");
  Rng adapter_rng = root.derive("adapter");

  const std::size_t d = config.d, dff = config.ffn_dim();
  Tensor embed = randn({config.vocab, d}, base, kEmbedStd);
  auto make = [&](std::size_t d_in, std::size_t d_out) {
    Tensor w = randn({d_in, d_out}, base, 1.0 / std::sqrt(static_cast<double>(d_in)));
    return AdaptedLinear::create(std::move(w), adapter.mode, adapter.rank, adapter_rng,
                                 adapter.alpha, adapter.a_std);
  };
  std::vector<Block> blocks;
  blocks.reserve(config.layers);
  for (std::size_t l = 0; l < config.layers; ++l) {
    auto q = make(d, d);
    auto k = make(d, d);
    auto v = make(d, d);
    auto o = make(d, d);
    auto up = make(d, dff);
    auto down = make(dff, d);
    blocks.push_back(Block{fresh_layer_norm(d), fresh_layer_norm(d), std::move(q), std::move(k),
                           std::move(v), std::move(o), std::move(up), std::move(down)});
  }
  const double alpha =
      adapted ? adapter.alpha.value_or(1.0 / static_cast<double>(adapter.rank)) : 1.0;
  return TransformerModel(config, adapter.mode, adapted ? adapter.rank : 0, alpha,
                          std::move(embed), std::move(blocks), fresh_layer_norm(d));
}

void TransformerModel::check_batch(const TokenBatch& batch) const {
  require(batch.batch >= 1 && batch.seq >= 1, ErrorKind::Data, "empty token batch");
  require(batch.seq <= config_.seq_len, ErrorKind::Data,
          "sequence length " + std::to_string(batch.seq) + " exceeds model limit " +
              std::to_string(config_.seq_len));
  require(batch.tokens.size() == batch.batch * batch.seq, ErrorKind::Data,
          "token buffer does not match batch x seq");
  for (auto t : batch.tokens)
    require(t >= 0 && static_cast<std::size_t>(t) < config_.vocab, ErrorKind::Data,
            "token id " + std::to_string(t) + " outside vocabulary of " +
                std::to_string(config_.vocab));
}

struct TransformerModel::Hidden {
  Tensor logits;  // [b, s, V]
};

TransformerModel::Hidden TransformerModel::run_forward(const TokenBatch& batch, Tape* tape) const {
  check_batch(batch);
  const std::size_t b = batch.batch, s = batch.seq, d = config_.d, H = config_.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(d / H));

  Tensor h({b, s, d});
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t t = 0; t < s; ++t) {
      const auto tok = static_cast<std::size_t>(batch.tokens[bi * s + t]);
      double* dst = h.raw() + (bi * s + t) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] = embed_[tok * d + j] + positions_.at(t, j);
    }

  if (tape) {
    tape->batch = b;
    tape->seq = s;
    tape->tokens = batch.tokens;
    tape->blocks.clear();
    tape->blocks.reserve(blocks_.size());
  }

  for (const Block& blk : blocks_) {
    BlockTape bt;
    auto h_in = share(std::move(h));
    auto a = share(layer_norm(*h_in, blk.ln1.gamma, blk.ln1.beta, kLayerNormEps));
    auto q = blk.q.forward(a);
    auto k = blk.k.forward(a);
    auto v = blk.v.forward(a);
    a.reset();

    auto qh = share(split_heads(q.y, H));
    auto kh = share(split_heads(k.y, H));
    auto vh = share(split_heads(v.y, H));
    Tensor scores = scale(matmul_nt(*qh, *kh), att_scale);
    auto probs = share(softmax_rows(scores, /*causal=*/true));
    auto o_in = share(merge_heads(matmul(*probs, *vh), H));
    auto o = blk.o.forward(std::move(o_in));

    auto h_mid = share(add(*h_in, o.y));
    auto c = share(layer_norm(*h_mid, blk.ln2.gamma, blk.ln2.beta, kLayerNormEps));
    auto up = blk.up.forward(std::move(c));
    auto ffn_pre = share(std::move(up.y));
    auto down = blk.down.forward(share(gelu(*ffn_pre)));
    h = add(*h_mid, down.y);

    if (tape) {
      bt.h_in = std::move(h_in);
      bt.q = std::move(q.kept);
      bt.k = std::move(k.kept);
      bt.v = std::move(v.kept);
      bt.o = std::move(o.kept);
      bt.up = std::move(up.kept);
      bt.down = std::move(down.kept);
      bt.qh = std::move(qh);
      bt.kh = std::move(kh);
      bt.vh = std::move(vh);
      bt.probs = std::move(probs);
      bt.h_mid = std::move(h_mid);
      bt.ffn_pre = std::move(ffn_pre);
      tape->blocks.push_back(std::move(bt));
    }
  }

  auto h_last = share(std::move(h));
  auto head_in = share(layer_norm(*h_last, ln_f_.gamma, ln_f_.beta, kLayerNormEps));
  Hidden out{matmul_nt(*head_in, embed_)};
  if (tape) {
    tape->h_last = std::move(h_last);
    if (trains_dense()) tape->head_in = std::move(head_in);
  }
  return out;
}

Tensor TransformerModel::logits(const TokenBatch& batch) const {
  return run_forward(batch, nullptr).logits;
}

TransformerModel::ForwardResult TransformerModel::forward_loss(const TokenBatch& batch) const {
  ForwardResult result;
  Hidden hidden = run_forward(batch, &result.tape);
  require(batch.targets.size() == batch.tokens.size(), ErrorKind::Data,
          "target buffer does not match token buffer");
  for (auto t : batch.targets)
    require(t < static_cast<std::int32_t>(config_.vocab), ErrorKind::Data,
            "target id " + std::to_string(t) + " outside vocabulary");
  CrossEntropy ce = cross_entropy(hidden.logits.as_matrix(), batch.targets);
  result.loss = ce.loss;
  result.tape.dlogits = share(std::move(ce.dlogits).reshaped(hidden.logits.shape()));
  return result;
}

GradientSet TransformerModel::backward(const Tape& tape) const {
  GradientSet grads;
  if (mode_ == AdaptationMode::Frozen) return grads;
  require(tape.blocks.size() == blocks_.size() && tape.dlogits && tape.h_last,
          ErrorKind::Retention, "tape does not come from a forward pass of this model");

  const std::size_t b = tape.batch, s = tape.seq, d = config_.d, H = config_.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(d / H));
  const bool dense = trains_dense();

  auto emit_linear = [&](const std::string& name, LinearGrads& g) {
    if (g.dW) grads.emplace(name + ".W", std::move(*g.dW));
    if (g.dA) grads.emplace(name + ".A", std::move(*g.dA));
    if (g.dB) grads.emplace(name + ".B", std::move(*g.dB));
  };
  auto layer_norm_back = [&](const std::string& name, const Tensor& x, const LayerNormParams& p,
                             const Tensor& up) {
    SavedInputs saved;
    saved.borrow("x", x);
    saved.borrow("gamma", p.gamma);
    OpAttrs attrs;
    attrs.eps = kLayerNormEps;
    auto g = vjp(OpKind::LayerNorm, saved, up, {true, dense, dense}, attrs);
    if (dense) {
      grads.emplace(name + ".gamma", std::move(*g[1]));
      grads.emplace(name + ".beta", std::move(*g[2]));
    }
    return std::move(*g[0]);
  };

  // Head: logits = head_in E^T
  const Tensor& dlogits = *tape.dlogits;
  Tensor dembed;
  if (dense) {
    require(static_cast<bool>(tape.head_in), ErrorKind::Retention,
            "dense head gradient needs the retained final-norm output");
    dembed = matmul_tn(dlogits, *tape.head_in);
  }
  Tensor dh = layer_norm_back("ln_f", *tape.h_last, ln_f_, matmul(dlogits, embed_));

  for (std::size_t l = blocks_.size(); l-- > 0;) {
    const Block& blk = blocks_[l];
    const BlockTape& bt = tape.blocks[l];
    const auto names = block_layer_names(l);
    const std::string prefix = "blocks." + std::to_string(l) + ".";

    // h = h_mid + down(gelu(up(ln2(h_mid))))
    LinearGrads g_down = blk.down.backward(bt.down, dh);
    emit_linear(names[5], g_down);
    SavedInputs gelu_saved;
    gelu_saved.keep("x", bt.ffn_pre);
    Tensor dpre = std::move(*vjp(OpKind::Gelu, gelu_saved, g_down.dx, {true})[0]);
    LinearGrads g_up = blk.up.backward(bt.up, dpre);
    emit_linear(names[4], g_up);
    axpy_inplace(dh, 1.0, layer_norm_back(prefix + "ln2", *bt.h_mid, blk.ln2, g_up.dx));

    // h_mid = h_in + o(attention(ln1(h_in)))
    LinearGrads g_o = blk.o.backward(bt.o, dh);
    emit_linear(names[3], g_o);
    Tensor dout = split_heads(g_o.dx.reshaped({b, s, d}), H);
    SavedInputs pv;
    pv.keep("a", bt.probs);
    pv.keep("b", bt.vh);
    OpAttrs batched;
    batched.batched = true;
    auto g_pv = vjp(OpKind::MatMul, pv, dout, {true, true}, batched);
    SavedInputs sm;
    sm.keep("y", bt.probs);
    Tensor dscores = scale(*vjp(OpKind::SoftmaxRows, sm, *g_pv[0], {true})[0], att_scale);
    Tensor dqh = matmul(dscores, *bt.kh);
    Tensor dkh = batched_matmul_tn(dscores, *bt.qh);

    LinearGrads g_q = blk.q.backward(bt.q, merge_heads(dqh, H));
    LinearGrads g_k = blk.k.backward(bt.k, merge_heads(dkh, H));
    LinearGrads g_v = blk.v.backward(bt.v, merge_heads(*g_pv[1], H));
    emit_linear(names[0], g_q);
    emit_linear(names[1], g_k);
    emit_linear(names[2], g_v);
    Tensor da = std::move(g_q.dx);
    axpy_inplace(da, 1.0, g_k.dx);
    axpy_inplace(da, 1.0, g_v.dx);
    axpy_inplace(dh, 1.0, layer_norm_back(prefix + "ln1", *bt.h_in, blk.ln1, da));
  }

  if (dense) {
    for (std::size_t bi = 0; bi < b; ++bi)
      for (std::size_t t = 0; t < s; ++t) {
        const auto tok = static_cast<std::size_t>(tape.tokens[bi * s + t]);
        const double* src = dh.raw() + (bi * s + t) * d;
        for (std::size_t j = 0; j < d; ++j) dembed[tok * d + j] += src[j];
      }
    dembed.check_finite("embedding backward");
    grads.emplace("embed", std::move(dembed));
  }
  return grads;
}

std::vector<RetainedEntry> Tape::retained() const {
  std::vector<RetainedEntry> out;
  auto other = [&](const std::string& owner, const std::shared_ptr<const Tensor>& t) {
    if (t) out.push_back({owner, RetainedCategory::Other, t.get()});
  };
  auto linear = [&](const std::string& owner, const RetainedActivations& kept) {
    if (kept.x_full) out.push_back({owner, RetainedCategory::LinearInputFull, kept.x_full.get()});
    if (kept.x_low) out.push_back({owner, RetainedCategory::LinearInputLowRank, kept.x_low.get()});
  };
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const BlockTape& bt = blocks[l];
    const auto names = block_layer_names(l);
    const std::string prefix = "blocks." + std::to_string(l) + ".";
    linear(names[0], bt.q);
    linear(names[1], bt.k);
    linear(names[2], bt.v);
    linear(names[3], bt.o);
    linear(names[4], bt.up);
    linear(names[5], bt.down);
    other(prefix + "ln1", bt.h_in);
    other(prefix + "attn.q_heads", bt.qh);
    other(prefix + "attn.k_heads", bt.kh);
    other(prefix + "attn.v_heads", bt.vh);
    other(prefix + "attn.probs", bt.probs);
    other(prefix + "ln2", bt.h_mid);
    other(prefix + "ffn.gelu", bt.ffn_pre);
  }
  other("ln_f", h_last);
  other("head", head_in);
  other("loss", dlogits);
  return out;
}

TrainableCount TransformerModel::count_trainable() const {
  TrainableCount count;
  for (const auto& named : adapted_layers()) count.linear_only += named.layer->trainable_count();
  count.full = count.linear_only;
  if (trains_dense()) {
    count.full += embed_.size() + ln_f_.gamma.size() + ln_f_.beta.size();
    for (const Block& blk : blocks_)
      count.full += blk.ln1.gamma.size() + blk.ln1.beta.size() + blk.ln2.gamma.size() +
                    blk.ln2.beta.size();
  }
  return count;
}

TrainableCount count_trainable_formula(const ModelConfig& config, AdaptationMode mode,
                                       std::size_t rank) {
  const std::size_t d = config.d, L = config.layers, ff = config.ffn_dim();
  TrainableCount c;
  switch (mode) {
    case AdaptationMode::FullFineTune:
      c.linear_only = L * (4 * d * d + 2 * d * ff);
      c.full = c.linear_only + config.vocab * d + L * 4 * d + 2 * d;
      return c;
    case AdaptationMode::LoRA:
      c.linear_only = L * rank * (8 * d + 2 * (d + ff));
      break;
    case AdaptationMode::LoRAFA:
      c.linear_only = L * rank * (4 * d + ff + d);
      break;
    case AdaptationMode::Frozen:
      break;
  }
  c.full = c.linear_only;
  return c;
}

std::vector<ParameterRef> TransformerModel::parameters() {
  std::vector<ParameterRef> out;
  const bool dense = trains_dense();
  const bool lora = mode_ == AdaptationMode::LoRA;
  const bool adapted = has_adapter(mode_);
  out.push_back({"embed", &embed_, dense});
  auto add_ln = [&](const std::string& name, LayerNormParams& p) {
    out.push_back({name + ".gamma", &p.gamma, dense});
    out.push_back({name + ".beta", &p.beta, dense});
  };
  auto add_linear = [&](const std::string& name, AdaptedLinear& layer) {
    out.push_back({name + ".W", &layer.w_mut(), dense});
    if (adapted) {
      out.push_back({name + ".A", &layer.a_mut(), lora});
      out.push_back({name + ".B", &layer.b_mut(), true});
    }
  };
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    Block& blk = blocks_[l];
    const auto names = block_layer_names(l);
    const std::string prefix = "blocks." + std::to_string(l) + ".";
    add_ln(prefix + "ln1", blk.ln1);
    add_linear(names[0], blk.q);
    add_linear(names[1], blk.k);
    add_linear(names[2], blk.v);
    add_linear(names[3], blk.o);
    add_ln(prefix + "ln2", blk.ln2);
    add_linear(names[4], blk.up);
    add_linear(names[5], blk.down);
  }
  add_ln("ln_f", ln_f_);
  return out;
}

std::vector<ParameterRef> TransformerModel::trainable_parameters() {
  std::vector<ParameterRef> out;
  for (auto& p : parameters())
    if (p.trainable) out.push_back(p);
  return out;
}

std::vector<NamedLayer> TransformerModel::adapted_layers() const {
  std::vector<NamedLayer> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& blk = blocks_[l];
    const auto names = block_layer_names(l);
    const AdaptedLinear* layers[] = {&blk.q, &blk.k, &blk.v, &blk.o, &blk.up, &blk.down};
    for (std::size_t i = 0; i < 6; ++i) out.push_back({names[i], layers[i]});
  }
  return out;
}

const AdaptedLinear& TransformerModel::layer(const std::string& name) const {
  for (const auto& named : adapted_layers())
    if (named.name == name) return *named.layer;
  fail(ErrorKind::Parameter, "no adapted layer named '" + name + "'");
}

AdaptedLinear& TransformerModel::layer(const std::string& name) {
  return const_cast<AdaptedLinear&>(std::as_const(*this).layer(name));
}

TransformerModel TransformerModel::merged() const {
  require(has_adapter(mode_), ErrorKind::Mode,
          "merging needs a lora or lora-fa model, not " + std::string(to_string(mode_)));
  auto fold = [](const AdaptedLinear& layer) {
    return AdaptedLinear::from_parts(layer.merge(), std::nullopt, std::nullopt,
                                     AdaptationMode::Frozen, 1.0);
  };
  std::vector<Block> blocks;
  for (const Block& blk : blocks_)
    blocks.push_back(Block{blk.ln1, blk.ln2, fold(blk.q), fold(blk.k), fold(blk.v), fold(blk.o),
                           fold(blk.up), fold(blk.down)});
  return TransformerModel(config_, AdaptationMode::Frozen, 0, 1.0, embed_, std::move(blocks),
                          ln_f_);
}

TransformerModel TransformerModel::with_adapters(const AdapterOptions& adapter,
                                                 std::uint64_t seed) const {
  if (has_adapter(mode_)) return merged().with_adapters(adapter, seed);
  const bool adapted = has_adapter(adapter.mode);
  if (adapted)
    require(adapter.rank >= 1 && adapter.rank <= config_.d, ErrorKind::Parameter,
            "rank " + std::to_string(adapter.rank) + " must lie in [1, d = " +
                std::to_string(config_.d) + "]");
  Rng adapter_rng = Rng(seed).derive("adapter");
  auto wrap = [&](const AdaptedLinear& layer) {
    return AdaptedLinear::create(layer.w(), adapter.mode, adapter.rank, adapter_rng,
                                 adapter.alpha, adapter.a_std);
  };
  std::vector<Block> blocks;
  blocks.reserve(blocks_.size());
  for (const Block& blk : blocks_) {
    auto q = wrap(blk.q);
    auto k = wrap(blk.k);
    auto v = wrap(blk.v);
    auto o = wrap(blk.o);
    auto up = wrap(blk.up);
    auto down = wrap(blk.down);
    blocks.push_back(Block{blk.ln1, blk.ln2, std::move(q), std::move(k), std::move(v),
                           std::move(o), std::move(up), std::move(down)});
  }
  const double alpha =
      adapted ? adapter.alpha.value_or(1.0 / static_cast<double>(adapter.rank)) : 1.0;
  return TransformerModel(config_, adapter.mode, adapted ? adapter.rank : 0, alpha, embed_,
                          std::move(blocks), ln_f_);
}

}  // namespace lorafa
