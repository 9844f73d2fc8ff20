// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "lorafa/lorafa.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "errors.hpp"
#include "harness.hpp"
#include "serialize.hpp"

struct lfa_config {
  lorafa::RunConfig cfg;
};

struct lfa_report {
  lorafa::RunReport rep;
};

struct lfa_model {
  lorafa::TransformerModel model;
};

struct lfa_buffer {
  std::string text;
};

namespace {

thread_local std::string g_last_error;

lfa_status status_for(lorafa::ErrorKind kind) {
  using lorafa::ErrorKind;
  switch (kind) {
    case ErrorKind::Dimension: return LFA_ERR_DIMENSION;
    case ErrorKind::Parameter: return LFA_ERR_PARAMETER;
    case ErrorKind::Retention: return LFA_ERR_RETENTION;
    case ErrorKind::Mode: return LFA_ERR_MODE;
    case ErrorKind::Data: return LFA_ERR_DATA;
    case ErrorKind::State: return LFA_ERR_STATE;
    case ErrorKind::Numeric: return LFA_ERR_DIVERGENCE;
    case ErrorKind::Reconciliation: return LFA_ERR_RECONCILIATION;
    case ErrorKind::Config: return LFA_ERR_CONFIG;
    case ErrorKind::Io: return LFA_ERR_IO;
  }
  return LFA_ERR_INTERNAL;
}

lfa_status set_error(lfa_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
lfa_status guard(F&& f) {
  try {
    return f();
  } catch (const lorafa::Error& e) {
    return set_error(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LFA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LFA_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(LFA_ERR_INTERNAL, "unknown failure");
  }
}

lfa_status null_arg(const char* what) {
  return set_error(LFA_ERR_INVALID_ARGUMENT, std::string("null argument: ") + what);
}

lfa_buffer* make_buffer(std::string text) { return new lfa_buffer{std::move(text)}; }

}  // namespace

extern "C" {

const char* lfa_version(void) { return "0.1.0"; }

const char* lfa_status_name(lfa_status status) {
  switch (status) {
    case LFA_OK: return "ok";
    case LFA_ERR_INTERNAL: return "internal";
    case LFA_ERR_CONFIG: return "config";
    case LFA_ERR_DIVERGENCE: return "divergence";
    case LFA_ERR_RECONCILIATION: return "reconciliation";
    case LFA_ERR_CHECK_FAILED: return "check-failed";
    case LFA_ERR_DIMENSION: return "dimension";
    case LFA_ERR_PARAMETER: return "parameter";
    case LFA_ERR_RETENTION: return "retention-policy";
    case LFA_ERR_MODE: return "mode";
    case LFA_ERR_DATA: return "data";
    case LFA_ERR_STATE: return "state";
    case LFA_ERR_IO: return "io";
    case LFA_ERR_INVALID_ARGUMENT: return "invalid-argument";
  }
  return "unknown";
}

const char* lfa_last_error(void) { return g_last_error.c_str(); }

const char* lfa_buffer_data(const lfa_buffer* buf) { return buf ? buf->text.c_str() : nullptr; }
size_t lfa_buffer_size(const lfa_buffer* buf) { return buf ? buf->text.size() : 0; }
void lfa_buffer_destroy(lfa_buffer* buf) { delete buf; }

lfa_status lfa_config_create(lfa_config** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new lfa_config{};
    return LFA_OK;
  });
}

lfa_status lfa_config_from_json(const char* json, lfa_config** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guard([&] {
    auto cfg = lorafa::run_config_from_json(lorafa::parse_json(json));
    *out = new lfa_config{std::move(cfg)};
    return LFA_OK;
  });
}

lfa_status lfa_config_set(lfa_config* cfg, const char* json_fragment) {
  if (!cfg) return null_arg("cfg");
  if (!json_fragment) return null_arg("json_fragment");
  return guard([&] {
    cfg->cfg = lorafa::run_config_from_json(lorafa::parse_json(json_fragment), cfg->cfg);
    return LFA_OK;
  });
}

lfa_status lfa_config_validate(const lfa_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guard([&] {
    cfg->cfg.validate();
    return LFA_OK;
  });
}

lfa_status lfa_config_to_json(const lfa_config* cfg, lfa_buffer** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    lorafa::Json j = lorafa::to_json(cfg->cfg);
    *out = make_buffer(lorafa::dump(j));
    return LFA_OK;
  });
}

void lfa_config_destroy(lfa_config* cfg) { delete cfg; }

lfa_status lfa_train(const lfa_config* cfg, lfa_report** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new lfa_report{lorafa::train_run(cfg->cfg)};
    if ((*out)->rep.status == "diverged")
      return set_error(LFA_ERR_DIVERGENCE, (*out)->rep.error);
    return LFA_OK;
  });
}

lfa_status lfa_report_to_json(const lfa_report* rep, lfa_buffer** out) {
  if (!rep) return null_arg("rep");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = make_buffer(lorafa::dump(lorafa::to_json(rep->rep)));
    return LFA_OK;
  });
}

lfa_status lfa_report_from_json(const char* json, lfa_report** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new lfa_report{lorafa::run_report_from_json(lorafa::parse_json(json))};
    return LFA_OK;
  });
}

lfa_status lfa_report_final_loss(const lfa_report* rep, double* out) {
  if (!rep) return null_arg("rep");
  if (!out) return null_arg("out");
  *out = rep->rep.final_loss;
  return LFA_OK;
}

lfa_status lfa_report_step_count(const lfa_report* rep, size_t* out) {
  if (!rep) return null_arg("rep");
  if (!out) return null_arg("out");
  *out = rep->rep.loss_curve.size();
  return LFA_OK;
}

void lfa_report_destroy(lfa_report* rep) { delete rep; }

lfa_status lfa_sweep(const lfa_config* cfg, const size_t* ranks, size_t n_ranks, const double* lrs,
                     size_t n_lrs, lfa_buffer** grid_json, lfa_buffer** grid_csv) {
  if (!cfg) return null_arg("cfg");
  if (n_ranks && !ranks) return null_arg("ranks");
  if (n_lrs && !lrs) return null_arg("lrs");
  return guard([&] {
    const auto grid = lorafa::sweep(cfg->cfg, std::vector<std::size_t>(ranks, ranks + n_ranks),
                                    std::vector<double>(lrs, lrs + n_lrs));
    if (grid_json) *grid_json = make_buffer(lorafa::dump(lorafa::to_json(grid)));
    if (grid_csv) *grid_csv = make_buffer(lorafa::sweep_csv(grid));
    return LFA_OK;
  });
}

lfa_status lfa_memreport(const lfa_config* cfg, int weight_bits, size_t num_shards,
                         int full_recompute, const char* probe_mode, lfa_buffer** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    lorafa::Modifiers mods{weight_bits, num_shards, full_recompute != 0};
    std::optional<lorafa::AdaptationMode> probe;
    if (probe_mode) probe = lorafa::parse_mode(probe_mode);
    const auto rep = lorafa::memreport(cfg->cfg.model, cfg->cfg.rank, mods, probe, cfg->cfg.seed);
    *out = make_buffer(lorafa::dump(lorafa::to_json(rep)));
    return LFA_OK;
  });
}

lfa_status lfa_equiv(uint64_t seed, size_t num_samples, lfa_buffer** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    const auto verdicts = lorafa::equiv_suite(seed, num_samples);
    const lorafa::Json j = lorafa::to_json(verdicts);
    *out = make_buffer(lorafa::dump(j));
    if (!j.at("pass").get<bool>())
      return set_error(LFA_ERR_CHECK_FAILED, "equivalence checks failed");
    return LFA_OK;
  });
}

lfa_status lfa_gradcheck(const char* mode, size_t rank, uint64_t seed, lfa_buffer** out) {
  if (!mode) return null_arg("mode");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto rep = lorafa::gradcheck(lorafa::parse_mode(mode), rank, seed);
    *out = make_buffer(lorafa::dump(lorafa::to_json(rep)));
    if (!rep.pass)
      return set_error(LFA_ERR_CHECK_FAILED, "finite-difference check exceeded tolerance");
    return LFA_OK;
  });
}

lfa_status lfa_model_create(const lfa_config* cfg, lfa_model** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    cfg->cfg.validate();
    *out = new lfa_model{
        lorafa::TransformerModel::build(cfg->cfg.model, cfg->cfg.adapter(), cfg->cfg.seed)};
    return LFA_OK;
  });
}

lfa_status lfa_model_load(const char* path, lfa_model** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] {
    auto model = lorafa::checkpoint_from_json(lorafa::parse_json(lorafa::read_file(path)));
    *out = new lfa_model{std::move(model)};
    return LFA_OK;
  });
}

lfa_status lfa_model_save(const lfa_model* model, const char* path) {
  if (!model) return null_arg("model");
  if (!path) return null_arg("path");
  return guard([&] {
    lorafa::write_file(path, lorafa::dump(lorafa::checkpoint_to_json(model->model)));
    return LFA_OK;
  });
}

lfa_status lfa_model_loss(const lfa_model* model, const lfa_config* cfg, uint64_t seed,
                          double* out) {
  if (!model) return null_arg("model");
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guard([&] {
    const auto& mc = model->model.config();
    const auto ds = lorafa::gen_task(cfg->cfg.task, mc.vocab, mc.seq_len, mc.batch, seed);
    *out = model->model.forward_loss(ds.batch(0, mc.batch)).loss;
    return LFA_OK;
  });
}

lfa_status lfa_model_trainable_count(const lfa_model* model, size_t* linear_only, size_t* full) {
  if (!model) return null_arg("model");
  return guard([&] {
    const auto c = model->model.count_trainable();
    if (linear_only) *linear_only = c.linear_only;
    if (full) *full = c.full;
    return LFA_OK;
  });
}

lfa_status lfa_model_merge(const lfa_model* model, lfa_model** out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new lfa_model{model->model.merged()};
    return LFA_OK;
  });
}

void lfa_model_destroy(lfa_model* model) { delete model; }

}  // extern "C"
