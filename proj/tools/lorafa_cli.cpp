// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors
//
// Command-line front end over the C API.
//
// Exit codes: 0 success, 1 internal failure, 2 configuration/usage error,
// 3 training diverged, 4 memory reconciliation failed, 5 a verification
// check did not pass.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorafa/lorafa.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitReconciliation = 4;
constexpr int kExitCheckFailed = 5;

int exit_code(lfa_status s) {
  switch (s) {
    case LFA_OK: return kExitOk;
    case LFA_ERR_CONFIG:
    case LFA_ERR_PARAMETER:
    case LFA_ERR_DIMENSION:
    case LFA_ERR_MODE:
    case LFA_ERR_DATA:
    case LFA_ERR_IO:
    case LFA_ERR_INVALID_ARGUMENT: return kExitConfig;
    case LFA_ERR_DIVERGENCE: return kExitDivergence;
    case LFA_ERR_RECONCILIATION: return kExitReconciliation;
    case LFA_ERR_CHECK_FAILED: return kExitCheckFailed;
    default: return kExitInternal;
  }
}

int report_failure(lfa_status s) {
  std::cerr << "lorafa: " << lfa_status_name(s) << ": " << lfa_last_error() << "\n";
  return exit_code(s);
}

struct Buffer {
  lfa_buffer* ptr = nullptr;
  ~Buffer() { lfa_buffer_destroy(ptr); }
  std::string str() const { return ptr ? std::string(lfa_buffer_data(ptr), lfa_buffer_size(ptr)) : ""; }
};

struct Config {
  lfa_config* ptr = nullptr;
  ~Config() { lfa_config_destroy(ptr); }
};

bool emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "lorafa: io: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

// Flags shared by the run-oriented subcommands; unset flags leave the
// config file (or defaults) untouched.
struct RunFlags {
  std::string config_path;
  std::optional<std::string> mode, task, optimizer, report;
  std::optional<std::size_t> rank, steps, batch, d, layers, heads, vocab, seq_len, equiv_every;
  std::optional<double> lr, alpha;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app, bool training) {
    app->add_option("--config", config_path, "JSON run configuration file");
    app->add_option("--mode", mode, "ft | lora | lora-fa | frozen");
    app->add_option("--rank", rank, "adapter rank r");
    app->add_option("--alpha", alpha, "adapter scale (default 1/r)");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--task", task, "copy | reverse | char-lm");
    app->add_option("--report", report, "output path (stdout when omitted)");
    app->add_option("--d", d, "hidden size");
    app->add_option("--layers", layers, "number of blocks");
    app->add_option("--heads", heads, "attention heads");
    app->add_option("--vocab", vocab, "vocabulary size");
    app->add_option("--seq-len", seq_len, "sequence length");
    app->add_option("--batch", batch, "batch size");
    if (training) {
      app->add_option("--lr", lr, "learning rate");
      app->add_option("--steps", steps, "optimizer steps");
      app->add_option("--optimizer", optimizer, "adamw | sgd");
      app->add_option("--equiv-every", equiv_every, "subspace checks every k steps");
    }
  }

  Json overrides() const {
    Json j = Json::object();
    Json model = Json::object();
    if (d) model["d"] = *d;
    if (layers) model["layers"] = *layers;
    if (heads) model["heads"] = *heads;
    if (vocab) model["vocab"] = *vocab;
    if (seq_len) model["seq_len"] = *seq_len;
    if (batch) model["batch"] = *batch;
    if (!model.empty()) j["model"] = model;
    if (mode) j["mode"] = *mode;
    if (rank) j["rank"] = *rank;
    if (alpha) j["alpha"] = *alpha;
    if (seed) j["seed"] = *seed;
    if (steps) j["steps"] = *steps;
    if (task) j["task"] = *task;
    if (equiv_every) j["equiv_every"] = *equiv_every;
    Json opt = Json::object();
    if (lr) opt["lr"] = *lr;
    if (optimizer) opt["kind"] = *optimizer;
    if (!opt.empty()) j["optimizer"] = opt;
    if (report) j["report"] = *report;
    return j;
  }

  // Builds the effective config: file first, then flags on top. Returns an
  // exit code.
  int load(Config& cfg) const {
    lfa_status s = lfa_config_create(&cfg.ptr);
    if (s == LFA_OK && !config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::cerr << "lorafa: config: cannot read '" << config_path << "'\n";
        return kExitConfig;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      s = lfa_config_set(cfg.ptr, ss.str().c_str());
    }
    if (s == LFA_OK) s = lfa_config_set(cfg.ptr, overrides().dump().c_str());
    if (s == LFA_OK) s = lfa_config_validate(cfg.ptr);
    return s == LFA_OK ? kExitOk : report_failure(s);
  }
};

std::string config_report_path(const Config& cfg) {
  Buffer b;
  if (lfa_config_to_json(cfg.ptr, &b.ptr) != LFA_OK) return "";
  return Json::parse(b.str()).value("report", std::string());
}

int cmd_train(const RunFlags& flags) {
  Config cfg;
  if (int rc = flags.load(cfg); rc != kExitOk) return rc;
  lfa_report* rep = nullptr;
  const lfa_status s = lfa_train(cfg.ptr, &rep);
  if (!rep) return report_failure(s);
  Buffer json;
  const lfa_status js = lfa_report_to_json(rep, &json.ptr);
  double final_loss = 0.0;
  lfa_report_final_loss(rep, &final_loss);
  lfa_report_destroy(rep);
  if (js != LFA_OK) return report_failure(js);
  const std::string path = config_report_path(cfg);
  if (!emit(json.str(), path)) return kExitConfig;
  if (!path.empty()) std::cerr << "final_loss " << final_loss << "\n";
  return s == LFA_OK ? kExitOk : report_failure(s);
}

int cmd_sweep(const RunFlags& flags, const std::vector<std::size_t>& ranks,
              const std::vector<double>& lrs, const std::string& csv_path) {
  Config cfg;
  if (int rc = flags.load(cfg); rc != kExitOk) return rc;
  Buffer json, csv;
  const lfa_status s =
      lfa_sweep(cfg.ptr, ranks.data(), ranks.size(), lrs.data(), lrs.size(), &json.ptr, &csv.ptr);
  if (s != LFA_OK) return report_failure(s);
  const std::string path = config_report_path(cfg);
  if (!path.empty() && !emit(json.str(), path)) return kExitConfig;
  if (!emit(csv.str(), csv_path)) return kExitConfig;
  return kExitOk;
}

int cmd_memreport(const RunFlags& flags, int bits, std::size_t shards, bool recompute,
                  const std::string& probe) {
  Config cfg;
  if (int rc = flags.load(cfg); rc != kExitOk) return rc;
  Buffer json;
  const lfa_status s = lfa_memreport(cfg.ptr, bits, shards, recompute ? 1 : 0,
                                     probe.empty() ? nullptr : probe.c_str(), &json.ptr);
  if (s != LFA_OK) return report_failure(s);
  return emit(json.str(), config_report_path(cfg)) ? kExitOk : kExitConfig;
}

int cmd_equiv(std::uint64_t seed, std::size_t samples, const std::string& report) {
  Buffer json;
  const lfa_status s = lfa_equiv(seed, samples, &json.ptr);
  if (json.ptr && !emit(json.str(), report)) return kExitConfig;
  return s == LFA_OK ? kExitOk : report_failure(s);
}

int cmd_gradcheck(const std::string& mode, std::size_t rank, std::uint64_t seed,
                  const std::string& report) {
  Buffer json;
  const lfa_status s = lfa_gradcheck(mode.c_str(), rank, seed, &json.ptr);
  if (json.ptr && !emit(json.str(), report)) return kExitConfig;
  return s == LFA_OK ? kExitOk : report_failure(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lorafa: low-rank adapter fine-tuning engine with frozen projection-down weights"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lfa_version()));

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train one configuration and emit a JSON report");
  train_flags.add(train, true);

  RunFlags sweep_flags;
  std::vector<std::size_t> ranks{1, 2, 4, 8};
  std::vector<double> lrs{1e-3, 3e-3, 1e-2};
  std::string csv_path;
  auto* sw = app.add_subcommand("sweep", "rank x learning-rate grid; CSV to stdout or --csv");
  sweep_flags.add(sw, true);
  sw->add_option("--ranks", ranks, "comma-separated ranks")->delimiter(',');
  sw->add_option("--lrs", lrs, "comma-separated learning rates")->delimiter(',');
  sw->add_option("--csv", csv_path, "CSV output path");

  RunFlags mem_flags;
  int bits = 16;
  std::size_t shards = 1;
  bool recompute = false;
  std::string probe;
  auto* mem = app.add_subcommand("memreport", "analytic memory breakdown for ft, lora and lora-fa");
  mem_flags.add(mem, false);
  mem->add_option("--weight-bits", bits, "16, 8 or 4");
  mem->add_option("--shards", shards, "weight shards");
  mem->add_flag("--recompute", recompute, "assume full activation recomputation");
  mem->add_option("--probe", probe, "also measure one forward in this mode");

  std::uint64_t equiv_seed = 0;
  std::size_t samples = 100000;
  std::string equiv_report;
  auto* eq = app.add_subcommand("equiv", "equivalence-lab checks as a JSON verdict");
  eq->add_option("--seed", equiv_seed, "random seed");
  eq->add_option("--samples", samples, "Monte-Carlo samples for the second-moment check");
  eq->add_option("--report", equiv_report, "output path");

  std::string gc_mode = "lora-fa";
  std::size_t gc_rank = 2;
  std::uint64_t gc_seed = 0;
  std::string gc_report;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check on a tiny model");
  gc->add_option("--mode", gc_mode, "ft | lora | lora-fa");
  gc->add_option("--rank", gc_rank, "adapter rank");
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_option("--report", gc_report, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*train) return cmd_train(train_flags);
  if (*sw) return cmd_sweep(sweep_flags, ranks, lrs, csv_path);
  if (*mem) return cmd_memreport(mem_flags, bits, shards, recompute, probe);
  if (*eq) return cmd_equiv(equiv_seed, samples, equiv_report);
  if (*gc) return cmd_gradcheck(gc_mode, gc_rank, gc_seed, gc_report);
  return kExitInternal;
}
