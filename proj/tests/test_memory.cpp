// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "errors.hpp"
#include "memory.hpp"
#include "tasks.hpp"

using namespace lorafa;

namespace {

ModelConfig geometry(std::size_t d, std::size_t L, std::size_t b, std::size_t s) {
  ModelConfig c;
  c.d = d;
  c.layers = L;
  c.heads = 4;
  c.vocab = 32;
  c.seq_len = s;
  c.batch = b;
  return c;
}

MeasuredActivations measure(const ModelConfig& c, AdaptationMode mode, std::size_t r) {
  const auto m = TransformerModel::build(c, {mode, r, {}, 1.0}, 0);
  const auto ds = gen_task(TaskKind::Copy, c.vocab, c.seq_len, c.batch, 0);
  return measured_activation_elements(m.forward_loss(ds.batch(0, c.batch)).tape);
}

MemoryBreakdown per_layer(const ModelConfig& c, AdaptationMode mode, std::size_t r) {
  return analytic_report(c, mode, r, c.batch, c.seq_len, {}, ActivationModel::PerLayerCount);
}

MemoryBreakdown paper(const ModelConfig& c, AdaptationMode mode, std::size_t r,
                      const Modifiers& mods = {}) {
  return analytic_report(c, mode, r, c.batch, c.seq_len, mods, ActivationModel::PaperConstant);
}

}  // namespace

TEST_CASE("activation model names") {
  CHECK(parse_activation_model("paper_constant") == ActivationModel::PaperConstant);
  CHECK(parse_activation_model(to_string(ActivationModel::PerLayerCount)) ==
        ActivationModel::PerLayerCount);
  CHECK_THROWS_AS(parse_activation_model("bogus"), Error);
}

TEST_CASE("large full fine-tune activation bytes") {
  const auto c = geometry(8192, 80, 4, 2048);
  const auto m = paper(c, AdaptationMode::FullFineTune, 4);
  CHECK(m.activation_bytes_linear == 14.0 * 4 * 2048 * 8192 * 80);
  CHECK(m.activation_bytes_linear / 1e9 == doctest::Approx(75.16).epsilon(1e-3));
  CHECK(m.activation_bytes_linear > 50e9);
}

TEST_CASE("per-block enumeration at b = s = 1") {
  const auto c = geometry(4, 1, 1, 1);
  const auto layers = analytic_layer_retention(c, AdaptationMode::FullFineTune, 2, 1, 1);
  std::size_t total = 0;
  for (const auto& l : layers) total += l.full;
  CHECK(total == 28);
  std::map<std::string, std::size_t> by_name;
  for (const auto& l : layers) by_name[l.layer] = l.full;
  CHECK(by_name["blocks.0.attn.q"] == 4);
  CHECK(by_name["blocks.0.attn.k"] == 0);
  CHECK(by_name["blocks.0.attn.v"] == 0);
  CHECK(by_name["blocks.0.attn.o"] == 4);
  CHECK(by_name["blocks.0.ffn.up"] == 4);
  CHECK(by_name["blocks.0.ffn.down"] == 16);
}

TEST_CASE("measured activations") {
  const auto c = geometry(32, 2, 2, 8);
  const auto fa = measure(c, AdaptationMode::LoRAFA, 4);
  CHECK(fa.linear_lowrank == 768);
  CHECK(fa.linear_full == 0);
  const auto ft = measure(c, AdaptationMode::FullFineTune, 4);
  CHECK(ft.linear_full == 7168);
  CHECK(ft.linear_lowrank == 0);
  const auto frozen = measure(c, AdaptationMode::Frozen, 4);
  CHECK(frozen.linear_full == 0);
  CHECK(frozen.linear_lowrank == 0);
  CHECK(frozen.other > 0);
}

TEST_CASE("analytic per-layer count reconciles with the meter") {
  for (auto mode : {AdaptationMode::FullFineTune, AdaptationMode::LoRA, AdaptationMode::LoRAFA,
                    AdaptationMode::Frozen}) {
    for (std::size_t r : {1, 4}) {
      const auto c = geometry(16, 2, 3, 5);
      const auto measured = measure(c, mode, r);
      const auto rep = reconcile(per_layer(c, mode, r), measured, paper(c, mode, r));
      CHECK(rep.analytic_full == rep.measured_full);
      CHECK(rep.analytic_lowrank == rep.measured_lowrank);
    }
  }
}

TEST_CASE("reconciliation mismatches are reported") {
  const auto c = geometry(16, 2, 3, 5);
  auto measured = measure(c, AdaptationMode::LoRA, 2);
  measured.layers[1].lowrank += 1;
  measured.linear_lowrank += 1;
  try {
    reconcile(per_layer(c, AdaptationMode::LoRA, 2), measured);
    FAIL("expected a reconciliation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Reconciliation);
    CHECK(std::string(e.what()).find(measured.layers[1].layer) != std::string::npos);
  }
  CHECK_THROWS_AS(reconcile(paper(c, AdaptationMode::LoRA, 2), measure(c, AdaptationMode::LoRA, 2)),
                  Error);
}

TEST_CASE("paper constants against enumeration") {
  const auto c = geometry(16, 2, 3, 5);
  const auto ft = reconcile(per_layer(c, AdaptationMode::FullFineTune, 2),
                            measure(c, AdaptationMode::FullFineTune, 2),
                            paper(c, AdaptationMode::FullFineTune, 2));
  CHECK(*ft.paper_full == static_cast<double>(ft.analytic_full));
  // Four-layer low-rank constant against six enumerated layers.
  const auto fa = reconcile(per_layer(c, AdaptationMode::LoRAFA, 2),
                            measure(c, AdaptationMode::LoRAFA, 2),
                            paper(c, AdaptationMode::LoRAFA, 2));
  CHECK(*fa.paper_lowrank_ratio == doctest::Approx(4.0 / 6.0));
  CHECK(fa.analytic_full == 0);
}

TEST_CASE("state and weight bytes") {
  const auto c = geometry(64, 2, 1, 1);
  const double n = 12.0 * 64 * 64 * 2;
  const double nr = 18.0 * 64 * 8 * 2;
  CHECK(paper(c, AdaptationMode::FullFineTune, 8).trainable_state_bytes == 14 * n);
  CHECK(paper(c, AdaptationMode::LoRA, 8).trainable_state_bytes == 16 * nr);
  CHECK(paper(c, AdaptationMode::LoRAFA, 8).trainable_state_bytes == 8 * nr);
  CHECK(paper(c, AdaptationMode::LoRA, 8).weight_bytes == 2 * n);

  Modifiers q4;
  q4.weight_bits = 4;
  Modifiers shard;
  shard.num_shards = 4;
  Modifiers rc;
  rc.full_recompute = true;
  const auto base = paper(c, AdaptationMode::LoRA, 8);
  for (const auto& mods : {q4, shard}) {
    const auto m = paper(c, AdaptationMode::LoRA, 8, mods);
    CHECK(m.weight_bytes == base.weight_bytes / 4);
    CHECK(m.trainable_state_bytes == base.trainable_state_bytes);
    CHECK(m.activation_bytes_linear == base.activation_bytes_linear);
  }
  const auto r = paper(c, AdaptationMode::LoRA, 8, rc);
  CHECK(r.activation_bytes_linear == 0);
  CHECK(r.recompute_flops);
  CHECK(r.weight_bytes == base.weight_bytes);
  Modifiers bad;
  bad.weight_bits = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = Modifiers{};
  bad.num_shards = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("totals are consistent, ordered and monotone") {
  for (auto model : {ActivationModel::PaperConstant, ActivationModel::PerLayerCount}) {
    const auto c = geometry(1024, 24, 64, 128);
    const auto ft = analytic_report(c, AdaptationMode::FullFineTune, 8, 64, 128, {}, model);
    const auto lora = analytic_report(c, AdaptationMode::LoRA, 8, 64, 128, {}, model);
    const auto fa = analytic_report(c, AdaptationMode::LoRAFA, 8, 64, 128, {}, model);
    CHECK(fa.total_bytes < lora.total_bytes);
    CHECK(lora.total_bytes < ft.total_bytes);
    for (const auto* m : {&ft, &lora, &fa})
      CHECK(m->total_bytes == m->weight_bytes + m->trainable_state_bytes +
                                  m->activation_bytes_linear + m->activation_bytes_other);
  }
  double prev = 0.0;
  for (std::size_t r : {1, 2, 4, 8, 16}) {
    const auto c = geometry(64, 2, 4, 8);
    const double t = per_layer(c, AdaptationMode::LoRAFA, r).total_bytes;
    CHECK(t > prev);
    prev = t;
  }
  prev = 0.0;
  for (std::size_t b : {1, 2, 4}) {
    const auto c = geometry(64, 2, b, 8);
    const double t = per_layer(c, AdaptationMode::LoRA, 4).total_bytes;
    CHECK(t > prev);
    prev = t;
  }
}
