// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace lorafa {

/// Bytes per element assumed by all accounting (16-bit framing), independent
/// of the compute precision.
constexpr double kAccountingBytesPerElement = 2.0;

enum class ActivationModel {
  PaperConstant,  // closed forms: 14bsdL (FT), 14bsdL + 8bsrL (LoRA), 8bsrL (LoRA-FA)
  PerLayerCount,  // sum of per-layer retention, q/k/v sharing one input
};

std::string_view to_string(ActivationModel model);
ActivationModel parse_activation_model(std::string_view text);

struct Modifiers {
  int weight_bits = 16;         // 16, 8 or 4
  std::size_t num_shards = 1;   // divides frozen/base weight bytes only
  bool full_recompute = false;  // drops retained linear inputs
  void validate() const;
};

struct LayerRetention {
  std::string layer;
  std::size_t full = 0;     // linear-input elements at full width
  std::size_t lowrank = 0;  // x A elements
};

struct MemoryBreakdown {
  double weight_bytes = 0.0;
  double trainable_state_bytes = 0.0;   // gradients + optimizer states + master copies
  double activation_bytes_linear = 0.0;
  double activation_bytes_other = 0.0;  // measured only; 0 in analytic reports
  double total_bytes = 0.0;

  double linear_full_elements = 0.0;
  double linear_lowrank_elements = 0.0;
  std::vector<LayerRetention> layers;  // per_layer_count only

  ActivationModel activation_model = ActivationModel::PerLayerCount;
  bool recompute_flops = false;
  std::string compute_precision = "f64";

  void update_total();
};

/// Per-layer retained linear-input elements for one forward of a [b, s]
/// batch. The q/k/v shared input is attributed to the query layer.
std::vector<LayerRetention> analytic_layer_retention(const ModelConfig& config,
                                                     AdaptationMode mode, std::size_t rank,
                                                     std::size_t batch, std::size_t seq);

MemoryBreakdown analytic_report(const ModelConfig& config, AdaptationMode mode, std::size_t rank,
                                std::size_t batch, std::size_t seq, const Modifiers& modifiers,
                                ActivationModel activation_model);

struct MeasuredActivations {
  std::size_t linear_full = 0;
  std::size_t linear_lowrank = 0;
  std::size_t other = 0;
  std::vector<LayerRetention> layers;

  /// Measured bytes at the accounting precision (weights and state omitted).
  MemoryBreakdown as_breakdown() const;
};

/// Counts every distinct retained tensor once. A tensor shared by several
/// owners is attributed to the first owner in tape order.
MeasuredActivations measured_activation_elements(const Tape& tape);

struct ReconcileReport {
  std::size_t analytic_full = 0;
  std::size_t analytic_lowrank = 0;
  std::size_t measured_full = 0;
  std::size_t measured_lowrank = 0;
  std::size_t measured_other = 0;
  // Informational: paper-constant element counts and their ratio to the
  // per-layer enumeration (1.0 where they agree).
  std::optional<double> paper_full;
  std::optional<double> paper_lowrank;
  std::optional<double> paper_lowrank_ratio;
};

/// Exact comparison of linear-input element counts, total and per layer.
/// Throws a reconciliation error listing every differing layer.
ReconcileReport reconcile(const MemoryBreakdown& analytic, const MeasuredActivations& measured,
                          const std::optional<MemoryBreakdown>& paper_constant = std::nullopt);

}  // namespace lorafa
