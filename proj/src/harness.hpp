// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memory.hpp"
#include "model.hpp"
#include "tasks.hpp"

namespace lorafa {

constexpr int kSchemaVersion = 1;

struct OptimizerConfig {
  std::string kind = "adamw";  // "adamw" or "sgd"
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::size_t warmup_steps = 0;  // linear warmup; 0 disables

  double lr_at(std::size_t step) const;
};

struct RunConfig {
  ModelConfig model;
  AdaptationMode mode = AdaptationMode::LoRAFA;
  std::size_t rank = 8;
  std::optional<double> alpha;
  double a_std = 1.0;
  OptimizerConfig optimizer;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  TaskKind task = TaskKind::Copy;
  std::size_t n_examples = 4096;
  std::size_t eval_examples = 64;
  std::size_t equiv_every = 0;  // subspace checks every k steps (lora-fa); 0 disables
  std::string report_path;

  /// Throws a config error describing the first invalid field.
  void validate() const;
  AdapterOptions adapter() const { return {mode, rank, alpha, a_std}; }
};

struct EquivVerdict {
  std::size_t step = 0;
  std::string check;  // "subspace_residual" or "subspace_rank"
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct MemorySection {
  MemoryBreakdown analytic;                 // per_layer_count
  MemoryBreakdown analytic_paper_constant;
  std::optional<MemoryBreakdown> measured;  // from the first training step
  std::optional<ReconcileReport> reconcile;
};

struct RunReport {
  int schema_version = kSchemaVersion;
  RunConfig config;
  std::string status = "ok";  // "ok" or "diverged"
  std::string error;
  std::vector<double> loss_curve;  // training loss per step
  double initial_loss = 0.0;       // eval-set loss before the first step
  double final_loss = 0.0;         // eval-set loss after the last step
  TrainableCount trainable;
  TrainableCount trainable_formula;
  MemorySection memory;
  std::vector<EquivVerdict> equivalence;
  double wall_clock_seconds = 0.0;
};

/// Training and evaluation sets for a run; both deterministic in the seed.
Dataset train_set(const RunConfig& cfg);
Dataset eval_set(const RunConfig& cfg);

/// Mean loss over `ds`, evaluated in chunks of the model's batch size.
double evaluate(const TransformerModel& model, const Dataset& ds);

RunReport train_run(const RunConfig& cfg);

struct SweepCell {
  std::size_t rank = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::string status;  // "ok", "diverged" or "failed"
  std::string error;
};

struct SweepGrid {
  RunConfig base;
  std::vector<std::size_t> ranks;
  std::vector<double> lrs;
  std::vector<SweepCell> cells;  // rank-major
};

std::uint64_t cell_seed(std::uint64_t seed, std::size_t rank, double lr);

/// Runs every (rank, lr) cell with seed `cell_seed(base.seed, rank, lr)`.
/// A failing cell is recorded and the sweep continues.
SweepGrid sweep(const RunConfig& base, const std::vector<std::size_t>& ranks,
                const std::vector<double>& lrs);

std::string sweep_csv(const SweepGrid& grid);

struct MemReport {
  ModelConfig model;
  std::size_t rank = 0;
  Modifiers modifiers;
  struct Entry {
    AdaptationMode mode;
    MemoryBreakdown paper_constant;
    MemoryBreakdown per_layer_count;
  };
  std::vector<Entry> entries;  // ft, lora, lora-fa
  // One-step probe of `probe_mode`, when requested.
  std::optional<AdaptationMode> probe_mode;
  std::optional<MeasuredActivations> probe;
  std::optional<ReconcileReport> probe_reconcile;
};

MemReport memreport(const ModelConfig& model, std::size_t rank, const Modifiers& modifiers,
                    std::optional<AdaptationMode> probe_mode, std::uint64_t seed = 0);

struct GradCheckEntry {
  std::string parameter;
  std::size_t checked = 0;
  double rel_error = 0.0;  // ||g - g_fd|| / max(||g||, ||g_fd||) over checked entries
};

struct GradCheckReport {
  AdaptationMode mode = AdaptationMode::LoRAFA;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  bool pass = false;
  std::vector<GradCheckEntry> entries;
};

/// Central differences on a tiny model (d=8, L=1, vocab=11) over up to
/// `per_tensor` entries of every trainable tensor.
GradCheckReport gradcheck(AdaptationMode mode, std::size_t rank, std::uint64_t seed,
                          std::size_t per_tensor = 6, double tolerance = 1e-4);

struct CheckVerdict {
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// Equivalence-lab checks: one-step SGD identity over 100 random layers,
/// Monte-Carlo second moment of A at d=8, r=4, and the column-space
/// residual after a short LoRA-FA AdamW run.
std::vector<CheckVerdict> equiv_suite(std::uint64_t seed, std::size_t num_samples);

}  // namespace lorafa
