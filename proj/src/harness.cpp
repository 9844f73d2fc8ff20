// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "equivalence.hpp"
#include "errors.hpp"
#include "ops.hpp"
#include "optim.hpp"
#include "rng.hpp"

namespace lorafa {

namespace {

constexpr double kSubspaceResidualTolerance = 1e-10;

void config_check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::Config, what);
}

struct Optimizer {
  explicit Optimizer(const OptimizerConfig& cfg) : cfg(cfg) {}

  void step(TransformerModel& model, const GradientSet& grads, std::size_t t) {
    const double lr = cfg.lr_at(t);
    if (cfg.kind == "sgd") {
      sgd_step(model.trainable_parameters(), grads, SgdConfig{lr});
    } else {
      adamw_step(model.trainable_parameters(), grads, state,
                 AdamWConfig{lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay});
    }
  }

  OptimizerConfig cfg;
  AdamWState state;
};

std::vector<Tensor> merged_weights(const TransformerModel& model) {
  std::vector<Tensor> out;
  for (const auto& named : model.adapted_layers()) out.push_back(named.layer->merge());
  return out;
}

void subspace_verdicts(const TransformerModel& model, const std::vector<Tensor>& before,
                       std::size_t step, std::vector<EquivVerdict>& out) {
  double worst_residual = 0.0;
  std::size_t worst_rank = 0;
  const auto layers = model.adapted_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const AdaptedLinear& layer = *layers[i].layer;
    const auto rep = subspace_check(*layer.a(), sub(layer.merge(), before[i]));
    worst_residual = std::max(worst_residual, rep.residual);
    worst_rank = std::max(worst_rank, rep.numerical_rank);
  }
  out.push_back({step, "subspace_residual", worst_residual, kSubspaceResidualTolerance,
                 worst_residual < kSubspaceResidualTolerance});
  out.push_back({step, "subspace_rank", static_cast<double>(worst_rank),
                 static_cast<double>(model.rank()), worst_rank <= model.rank()});
}

TokenBatch random_tokens(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng = Rng(seed).derive("probe");
  TokenBatch batch{cfg.batch, cfg.seq_len, {}, {}};
  for (std::size_t i = 0; i < cfg.batch * cfg.seq_len; ++i)
    batch.tokens.push_back(static_cast<std::int32_t>(rng.next_below(cfg.vocab)));
  for (std::size_t i = 0; i < batch.tokens.size(); ++i)
    batch.targets.push_back((i + 1) % cfg.seq_len == 0 ? -1 : batch.tokens[i + 1]);
  return batch;
}

}  // namespace

double OptimizerConfig::lr_at(std::size_t step) const {
  if (warmup_steps == 0 || step >= warmup_steps) return lr;
  return lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  config_check(model.vocab >= 4, "model.vocab must be >= 4 (three ids are reserved)");
  config_check(model.seq_len >= 4, "model.seq_len must be >= 4");
  if (has_adapter(mode))
    config_check(rank >= 1 && rank <= model.d && rank <= model.ffn_dim(),
                 "rank must lie in [1, d]");
  config_check(!alpha || *alpha > 0.0, "alpha must be positive");
  config_check(a_std > 0.0, "a_std must be positive");
  config_check(optimizer.kind == "adamw" || optimizer.kind == "sgd",
               "optimizer.kind must be 'adamw' or 'sgd'");
  config_check(optimizer.lr > 0.0 && std::isfinite(optimizer.lr), "optimizer.lr must be positive");
  config_check(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "optimizer.beta1 must lie in [0, 1)");
  config_check(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "optimizer.beta2 must lie in [0, 1)");
  config_check(optimizer.eps > 0.0, "optimizer.eps must be positive");
  config_check(optimizer.weight_decay >= 0.0, "optimizer.weight_decay must be non-negative");
  config_check(n_examples >= 1, "n_examples must be >= 1");
  config_check(eval_examples >= 1, "eval_examples must be >= 1");
}

Dataset train_set(const RunConfig& cfg) {
  return gen_task(cfg.task, cfg.model.vocab, cfg.model.seq_len, cfg.n_examples,
                  hash_combine(cfg.seed, fnv1a("train")));
}

Dataset eval_set(const RunConfig& cfg) {
  return gen_task(cfg.task, cfg.model.vocab, cfg.model.seq_len, cfg.eval_examples,
                  hash_combine(cfg.seed, fnv1a("eval")));
}

double evaluate(const TransformerModel& model, const Dataset& ds) {
  const std::size_t b = model.config().batch;
  double total = 0.0;
  for (std::size_t first = 0; first < ds.count; first += b) {
    const std::size_t n = std::min(b, ds.count - first);
    total += model.forward_loss(ds.batch(first, n)).loss * static_cast<double>(n);
  }
  return total / static_cast<double>(ds.count);
}

RunReport train_run(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = cfg;

  TransformerModel model = TransformerModel::build(cfg.model, cfg.adapter(), cfg.seed);
  rep.trainable = model.count_trainable();
  rep.trainable_formula = count_trainable_formula(cfg.model, cfg.mode, cfg.rank);

  const std::size_t b = cfg.model.batch, s = cfg.model.seq_len;
  const Modifiers defaults;
  rep.memory.analytic = analytic_report(cfg.model, cfg.mode, cfg.rank, b, s, defaults,
                                        ActivationModel::PerLayerCount);
  rep.memory.analytic_paper_constant = analytic_report(cfg.model, cfg.mode, cfg.rank, b, s,
                                                       defaults, ActivationModel::PaperConstant);

  const Dataset train = train_set(cfg);
  const Dataset eval = eval_set(cfg);
  const bool check_subspace = cfg.equiv_every > 0 && cfg.mode == AdaptationMode::LoRAFA;
  const std::vector<Tensor> merged_before =
      check_subspace ? merged_weights(model) : std::vector<Tensor>{};

  try {
    rep.initial_loss = evaluate(model, eval);
    Optimizer opt(cfg.optimizer);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      auto fr = model.forward_loss(train.batch(step * b, b));
      rep.loss_curve.push_back(fr.loss);
      if (!std::isfinite(fr.loss)) fail(ErrorKind::Numeric, "training loss is not finite");
      if (step == 0) {
        const auto measured = measured_activation_elements(fr.tape);
        rep.memory.measured = measured.as_breakdown();
        rep.memory.reconcile =
            reconcile(rep.memory.analytic, measured, rep.memory.analytic_paper_constant);
      }
      const GradientSet grads = model.backward(fr.tape);
      opt.step(model, grads, step);
      if (check_subspace && (step + 1) % cfg.equiv_every == 0)
        subspace_verdicts(model, merged_before, step + 1, rep.equivalence);
    }
    rep.final_loss = evaluate(model, eval);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Numeric) throw;
    rep.status = "diverged";
    rep.error = e.what();
    rep.final_loss = std::numeric_limits<double>::quiet_NaN();
  }
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t rank, double lr) {
  return hash_combine(hash_combine(seed, rank), std::bit_cast<std::uint64_t>(lr));
}

SweepGrid sweep(const RunConfig& base, const std::vector<std::size_t>& ranks,
                const std::vector<double>& lrs) {
  config_check(!ranks.empty() && !lrs.empty(), "sweep needs at least one rank and one lr");
  SweepGrid grid{base, ranks, lrs, {}};
  for (std::size_t r : ranks)
    for (double lr : lrs) {
      SweepCell cell{r, lr, cell_seed(base.seed, r, lr), 0.0, "ok", ""};
      RunConfig cfg = base;
      cfg.rank = r;
      cfg.optimizer.lr = lr;
      cfg.seed = cell.seed;
      cfg.report_path.clear();
      try {
        const RunReport rep = train_run(cfg);
        cell.final_loss = rep.final_loss;
        cell.status = rep.status;
        cell.error = rep.error;
      } catch (const Error& e) {
        cell.final_loss = std::numeric_limits<double>::quiet_NaN();
        cell.status = "failed";
        cell.error = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  return grid;
}

std::string sweep_csv(const SweepGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,lr,final_loss,status\n";
  for (const auto& c : grid.cells) {
    out << c.rank << ',' << c.lr << ',';
    if (std::isfinite(c.final_loss)) out << c.final_loss;
    out << ',' << c.status << '\n';
  }
  return out.str();
}

MemReport memreport(const ModelConfig& model, std::size_t rank, const Modifiers& modifiers,
                    std::optional<AdaptationMode> probe_mode, std::uint64_t seed) {
  model.validate();
  modifiers.validate();
  MemReport rep{model, rank, modifiers, {}, probe_mode, std::nullopt, std::nullopt};
  const std::size_t b = model.batch, s = model.seq_len;
  for (AdaptationMode mode :
       {AdaptationMode::FullFineTune, AdaptationMode::LoRA, AdaptationMode::LoRAFA}) {
    rep.entries.push_back(
        {mode,
         analytic_report(model, mode, rank, b, s, modifiers, ActivationModel::PaperConstant),
         analytic_report(model, mode, rank, b, s, modifiers, ActivationModel::PerLayerCount)});
  }
  if (probe_mode) {
    const auto net = TransformerModel::build(model, {*probe_mode, rank, std::nullopt, 1.0}, seed);
    const auto fr = net.forward_loss(random_tokens(model, seed));
    rep.probe = measured_activation_elements(fr.tape);
    const auto analytic = analytic_report(model, *probe_mode, rank, b, s, Modifiers{},
                                          ActivationModel::PerLayerCount);
    const auto paper = analytic_report(model, *probe_mode, rank, b, s, Modifiers{},
                                       ActivationModel::PaperConstant);
    rep.probe_reconcile = reconcile(analytic, *rep.probe, paper);
  }
  return rep;
}

GradCheckReport gradcheck(AdaptationMode mode, std::size_t rank, std::uint64_t seed,
                          std::size_t per_tensor, double tolerance) {
  require(per_tensor >= 1, ErrorKind::Parameter, "per_tensor must be >= 1");
  ModelConfig cfg;
  cfg.d = 8;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.vocab = 11;
  cfg.seq_len = 6;
  cfg.batch = 2;
  TransformerModel model = TransformerModel::build(cfg, {mode, rank, std::nullopt, 1.0}, seed);
  // Non-zero B so every adapter path carries gradient.
  Rng rng = Rng(seed).derive("gradcheck");
  if (has_adapter(mode))
    for (auto& p : model.parameters())
      if (p.name.ends_with(".B")) *p.value = randn(p.value->shape(), rng, 0.5);

  const TokenBatch batch = gen_task(TaskKind::CharLm, cfg.vocab, cfg.seq_len, cfg.batch, seed)
                               .batch(0, cfg.batch);
  const auto fr = model.forward_loss(batch);
  const GradientSet grads = model.backward(fr.tape);

  GradCheckReport rep{mode, tolerance, 0.0, true, {}};
  for (auto& p : model.trainable_parameters()) {
    Tensor& value = *p.value;
    const Tensor& g = grads.at(p.name);
    const std::size_t n = value.size();
    const std::size_t count = std::min(per_tensor, n);
    double diff2 = 0.0, ga2 = 0.0, gn2 = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = k * n / count;
      const double orig = value[i];
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      value[i] = orig + h;
      const double up = model.forward_loss(batch).loss;
      value[i] = orig - h;
      const double down = model.forward_loss(batch).loss;
      value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (g[i] - numeric) * (g[i] - numeric);
      ga2 += g[i] * g[i];
      gn2 += numeric * numeric;
    }
    const double denom = std::sqrt(std::max({ga2, gn2, 1e-30}));
    const double rel = std::sqrt(diff2) / denom;
    rep.entries.push_back({p.name, count, rel});
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
  }
  rep.pass = rep.max_rel_error < tolerance;
  return rep;
}

std::vector<CheckVerdict> equiv_suite(std::uint64_t seed, std::size_t num_samples) {
  require(num_samples >= 1, ErrorKind::Parameter, "num_samples must be >= 1");
  std::vector<CheckVerdict> out;
  Rng rng = Rng(seed).derive("equiv");

  double worst = 0.0;
  constexpr std::size_t kLayers = 100;
  for (std::size_t i = 0; i < kLayers; ++i) {
    const std::size_t d_in = 1 + rng.next_below(16), d_out = 1 + rng.next_below(16);
    const std::size_t full = std::min(d_in, d_out);
    const std::size_t options[] = {1, std::min<std::size_t>(4, full), full};
    const std::size_t r = options[i % 3];
    auto layer = AdaptedLinear::from_parts(
        randn({d_in, d_out}, rng, 1.0), randn({d_in, r}, rng, 1.0), randn({r, d_out}, rng, 1.0),
        AdaptationMode::LoRAFA, 1.0 / static_cast<double>(r));
    const Tensor x = randn({3, 2, d_in}, rng, 1.0);
    const Tensor dy = randn({3, 2, d_out}, rng, 1.0);
    worst = std::max(worst, verify_sgd_equivalence(layer, x, dy, 0.1).discrepancy);
  }
  out.push_back({"sgd_equivalence", worst, 1e-10, worst < 1e-10,
                 std::to_string(kLayers) + " random layers, max-abs discrepancy"});

  Rng mc = rng.derive("unbiasedness");
  const double err = estimate_unbiasedness(8, 4, num_samples, mc);
  out.push_back({"unbiasedness", err, 0.02, err < 0.02,
                 "d=8 r=4 samples=" + std::to_string(num_samples) + ", relative Frobenius error"});

  RunConfig cfg;
  cfg.model.d = 16;
  cfg.model.layers = 1;
  cfg.model.heads = 2;
  cfg.model.vocab = 12;
  cfg.model.seq_len = 8;
  cfg.model.batch = 4;
  cfg.mode = AdaptationMode::LoRAFA;
  cfg.rank = 4;
  cfg.steps = 20;
  cfg.equiv_every = 20;
  cfg.seed = seed;
  const RunReport rep = train_run(cfg);
  for (const auto& v : rep.equivalence)
    out.push_back({v.check, v.value, v.threshold, v.pass,
                   "after " + std::to_string(v.step) + " adamw steps, worst adapted layer"});
  return out;
}

}  // namespace lorafa
