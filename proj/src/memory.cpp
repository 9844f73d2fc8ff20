// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "memory.hpp"

#include <map>
#include <set>

#include "errors.hpp"

namespace lorafa {

std::string_view to_string(ActivationModel model) {
  return model == ActivationModel::PaperConstant ? "paper_constant" : "per_layer_count";
}

ActivationModel parse_activation_model(std::string_view text) {
  if (text == "paper_constant") return ActivationModel::PaperConstant;
  if (text == "per_layer_count") return ActivationModel::PerLayerCount;
  fail(ErrorKind::Parameter, "unknown activation model '" + std::string(text) + "'");
}

void Modifiers::validate() const {
  require(weight_bits == 16 || weight_bits == 8 || weight_bits == 4, ErrorKind::Parameter,
          "weight_bits must be 16, 8 or 4");
  require(num_shards >= 1, ErrorKind::Parameter, "num_shards must be >= 1");
}

void MemoryBreakdown::update_total() {
  total_bytes = weight_bytes + trainable_state_bytes + activation_bytes_linear +
                activation_bytes_other;
}

std::vector<LayerRetention> analytic_layer_retention(const ModelConfig& config,
                                                     AdaptationMode mode, std::size_t rank,
                                                     std::size_t batch, std::size_t seq) {
  const std::size_t d = config.d, ff = config.ffn_dim();
  const bool keeps_full =
      mode == AdaptationMode::FullFineTune || mode == AdaptationMode::LoRA;
  const std::size_t r = has_adapter(mode) ? rank : 0;
  std::vector<LayerRetention> out;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto names = block_layer_names(l);
    const std::size_t d_ins[] = {d, d, d, d, d, ff};
    for (std::size_t i = 0; i < 6; ++i) {
      const std::size_t total = retained_elements(mode, d_ins[i], r, batch, seq);
      LayerRetention lr{names[i], keeps_full ? batch * seq * d_ins[i] : 0, 0};
      lr.lowrank = total - lr.full;
      if (i == 1 || i == 2) lr.full = 0;  // k and v read the query's stored input
      out.push_back(lr);
    }
  }
  return out;
}

MemoryBreakdown analytic_report(const ModelConfig& config, AdaptationMode mode, std::size_t rank,
                                std::size_t batch, std::size_t seq, const Modifiers& modifiers,
                                ActivationModel activation_model) {
  config.validate();
  modifiers.validate();
  if (has_adapter(mode))
    require(rank >= 1, ErrorKind::Parameter, "adapter modes need rank >= 1");

  const double d = static_cast<double>(config.d), L = static_cast<double>(config.layers);
  const double b = static_cast<double>(batch), s = static_cast<double>(seq);
  const double r = static_cast<double>(rank);
  const double n = static_cast<double>(
      count_trainable_formula(config, AdaptationMode::FullFineTune, 0).linear_only);

  MemoryBreakdown m;
  m.activation_model = activation_model;
  m.weight_bytes = 2.0 * n * (modifiers.weight_bits / 16.0) / static_cast<double>(modifiers.num_shards);

  switch (mode) {
    case AdaptationMode::FullFineTune:
      m.trainable_state_bytes = 14.0 * n;
      break;
    case AdaptationMode::LoRA:
      m.trainable_state_bytes =
          16.0 * static_cast<double>(count_trainable_formula(config, mode, rank).linear_only);
      break;
    case AdaptationMode::LoRAFA:
      m.trainable_state_bytes =
          16.0 * static_cast<double>(count_trainable_formula(config, mode, rank).linear_only);
      break;
    case AdaptationMode::Frozen:
      break;
  }

  if (activation_model == ActivationModel::PaperConstant) {
    const double full = 7.0 * b * s * d * L;
    const double low = 4.0 * b * s * r * L;
    switch (mode) {
      case AdaptationMode::FullFineTune: m.linear_full_elements = full; break;
      case AdaptationMode::LoRA:
        m.linear_full_elements = full;
        m.linear_lowrank_elements = low;
        break;
      case AdaptationMode::LoRAFA: m.linear_lowrank_elements = low; break;
      case AdaptationMode::Frozen: break;
    }
  } else {
    m.layers = analytic_layer_retention(config, mode, rank, batch, seq);
    for (const auto& lr : m.layers) {
      m.linear_full_elements += static_cast<double>(lr.full);
      m.linear_lowrank_elements += static_cast<double>(lr.lowrank);
    }
  }
  m.activation_bytes_linear =
      kAccountingBytesPerElement * (m.linear_full_elements + m.linear_lowrank_elements);
  if (modifiers.full_recompute) {
    m.activation_bytes_linear = 0.0;
    m.recompute_flops = true;
  }
  m.update_total();
  return m;
}

MeasuredActivations measured_activation_elements(const Tape& tape) {
  MeasuredActivations out;
  std::set<const Tensor*> seen;
  std::map<std::string, std::size_t> index;
  auto slot = [&](const std::string& owner) -> LayerRetention& {
    auto [it, inserted] = index.emplace(owner, out.layers.size());
    if (inserted) out.layers.push_back({owner, 0, 0});
    return out.layers[it->second];
  };
  for (const auto& entry : tape.retained()) {
    if (entry.category != RetainedCategory::Other) slot(entry.owner);
    if (!seen.insert(entry.tensor).second) continue;
    const std::size_t n = entry.tensor->size();
    switch (entry.category) {
      case RetainedCategory::LinearInputFull:
        out.linear_full += n;
        slot(entry.owner).full += n;
        break;
      case RetainedCategory::LinearInputLowRank:
        out.linear_lowrank += n;
        slot(entry.owner).lowrank += n;
        break;
      case RetainedCategory::Other:
        out.other += n;
        break;
    }
  }
  return out;
}

MemoryBreakdown MeasuredActivations::as_breakdown() const {
  MemoryBreakdown m;
  m.layers = layers;
  m.linear_full_elements = static_cast<double>(linear_full);
  m.linear_lowrank_elements = static_cast<double>(linear_lowrank);
  m.activation_bytes_linear =
      kAccountingBytesPerElement * static_cast<double>(linear_full + linear_lowrank);
  m.activation_bytes_other = kAccountingBytesPerElement * static_cast<double>(other);
  m.update_total();
  return m;
}

ReconcileReport reconcile(const MemoryBreakdown& analytic, const MeasuredActivations& measured,
                          const std::optional<MemoryBreakdown>& paper_constant) {
  require(analytic.activation_model == ActivationModel::PerLayerCount, ErrorKind::Parameter,
          "reconcile needs a per_layer_count analytic report");
  ReconcileReport rep;
  rep.analytic_full = static_cast<std::size_t>(analytic.linear_full_elements);
  rep.analytic_lowrank = static_cast<std::size_t>(analytic.linear_lowrank_elements);
  rep.measured_full = measured.linear_full;
  rep.measured_lowrank = measured.linear_lowrank;
  rep.measured_other = measured.other;
  if (paper_constant) {
    rep.paper_full = paper_constant->linear_full_elements;
    rep.paper_lowrank = paper_constant->linear_lowrank_elements;
    if (analytic.linear_lowrank_elements > 0.0)
      rep.paper_lowrank_ratio =
          paper_constant->linear_lowrank_elements / analytic.linear_lowrank_elements;
  }

  std::string diffs;
  std::map<std::string, const LayerRetention*> seen;
  for (const auto& lr : measured.layers) seen[lr.layer] = &lr;
  for (const auto& a : analytic.layers) {
    const auto it = seen.find(a.layer);
    const std::size_t mf = it == seen.end() ? 0 : it->second->full;
    const std::size_t ml = it == seen.end() ? 0 : it->second->lowrank;
    if (mf != a.full || ml != a.lowrank)
      diffs += "\n  " + a.layer + ": analytic full=" + std::to_string(a.full) +
               " lowrank=" + std::to_string(a.lowrank) + ", measured full=" +
               std::to_string(mf) + " lowrank=" + std::to_string(ml);
    if (it != seen.end()) seen.erase(it);
  }
  for (const auto& [name, lr] : seen)
    if (lr->full || lr->lowrank)
      diffs += "\n  " + name + ": measured only (full=" + std::to_string(lr->full) +
               " lowrank=" + std::to_string(lr->lowrank) + ")";
  if (rep.analytic_full != rep.measured_full || rep.analytic_lowrank != rep.measured_lowrank)
    diffs += "\n  totals: analytic " + std::to_string(rep.analytic_full) + "/" +
             std::to_string(rep.analytic_lowrank) + ", measured " +
             std::to_string(rep.measured_full) + "/" + std::to_string(rep.measured_lowrank);
  if (!diffs.empty()) fail(ErrorKind::Reconciliation, "linear-input element counts differ:" + diffs);
  return rep;
}

}  // namespace lorafa
