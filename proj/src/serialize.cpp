// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#include "serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace lorafa {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double get_num(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) fail(ErrorKind::Config, "expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

std::uint64_t get_count(const Json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  fail(ErrorKind::Config, "'" + key + "' must be a non-negative integer");
}

std::string get_str(const Json& j, const std::string& key) {
  if (!j.is_string()) fail(ErrorKind::Config, "'" + key + "' must be a string");
  return j.get<std::string>();
}

bool get_bool(const Json& j, const std::string& key) {
  if (!j.is_boolean()) fail(ErrorKind::Config, "'" + key + "' must be a boolean");
  return j.get<bool>();
}

void expect_object(const Json& j, const std::string& where,
                   std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorKind::Config, where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) fail(ErrorKind::Config, "unknown key '" + key + "' in " + where);
}

// Re-raises library parse/type failures as config errors.
template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorKind::Config, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, e.what());
  }
}

ModelConfig model_config_from_json(const Json& j, ModelConfig cfg) {
  expect_object(j, "model", {"d", "layers", "heads", "d_ff", "vocab", "seq_len", "batch"});
  if (j.contains("d")) cfg.d = get_count(j["d"], "d");
  if (j.contains("layers")) cfg.layers = get_count(j["layers"], "layers");
  if (j.contains("heads")) cfg.heads = get_count(j["heads"], "heads");
  if (j.contains("d_ff")) cfg.d_ff = get_count(j["d_ff"], "d_ff");
  if (j.contains("vocab")) cfg.vocab = get_count(j["vocab"], "vocab");
  if (j.contains("seq_len")) cfg.seq_len = get_count(j["seq_len"], "seq_len");
  if (j.contains("batch")) cfg.batch = get_count(j["batch"], "batch");
  return cfg;
}

Json to_json(const TrainableCount& c) {
  return Json{{"linear_only", c.linear_only}, {"full", c.full}};
}

TrainableCount trainable_from_json(const Json& j) {
  return {get_count(j.at("linear_only"), "linear_only"), get_count(j.at("full"), "full")};
}

Json to_json(const LayerRetention& lr) {
  return Json{{"layer", lr.layer}, {"full", lr.full}, {"lowrank", lr.lowrank}};
}

LayerRetention layer_from_json(const Json& j) {
  return {get_str(j.at("layer"), "layer"), get_count(j.at("full"), "full"),
          get_count(j.at("lowrank"), "lowrank")};
}

std::optional<double> opt_num(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return get_num(j);
}

Json opt_num_json(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

ReconcileReport reconcile_from_json(const Json& j) {
  ReconcileReport r;
  r.analytic_full = get_count(j.at("analytic_full"), "analytic_full");
  r.analytic_lowrank = get_count(j.at("analytic_lowrank"), "analytic_lowrank");
  r.measured_full = get_count(j.at("measured_full"), "measured_full");
  r.measured_lowrank = get_count(j.at("measured_lowrank"), "measured_lowrank");
  r.measured_other = get_count(j.at("measured_other"), "measured_other");
  r.paper_full = opt_num(j.at("paper_full"));
  r.paper_lowrank = opt_num(j.at("paper_lowrank"));
  r.paper_lowrank_ratio = opt_num(j.at("paper_lowrank_ratio"));
  return r;
}

Json tensor_json(const Tensor& t) {
  Json data = Json::array();
  for (double x : t.data()) data.push_back(x);
  return Json{{"shape", t.shape()}, {"data", std::move(data)}};
}

}  // namespace

Json to_json(const ModelConfig& cfg) {
  return Json{{"d", cfg.d},         {"layers", cfg.layers},   {"heads", cfg.heads},
              {"d_ff", cfg.d_ff},   {"vocab", cfg.vocab},     {"seq_len", cfg.seq_len},
              {"batch", cfg.batch}};
}

Json to_json(const RunConfig& cfg) {
  const auto& o = cfg.optimizer;
  return Json{{"model", to_json(cfg.model)},
              {"mode", std::string(to_string(cfg.mode))},
              {"rank", cfg.rank},
              {"alpha", opt_num_json(cfg.alpha)},
              {"a_std", num(cfg.a_std)},
              {"optimizer",
               {{"kind", o.kind},
                {"lr", num(o.lr)},
                {"beta1", num(o.beta1)},
                {"beta2", num(o.beta2)},
                {"eps", num(o.eps)},
                {"weight_decay", num(o.weight_decay)},
                {"warmup_steps", o.warmup_steps}}},
              {"steps", cfg.steps},
              {"seed", cfg.seed},
              {"task", std::string(to_string(cfg.task))},
              {"n_examples", cfg.n_examples},
              {"eval_examples", cfg.eval_examples},
              {"equiv_every", cfg.equiv_every},
              {"report", cfg.report_path}};
}

RunConfig run_config_from_json(const Json& j, const RunConfig& base) {
  return guarded([&] {
    expect_object(j, "config",
                  {"schema_version", "model", "mode", "rank", "alpha", "a_std", "optimizer", "steps",
                   "seed", "task", "n_examples", "eval_examples", "equiv_every", "report"});
    RunConfig cfg = base;
    if (j.contains("schema_version") &&
        get_count(j["schema_version"], "schema_version") != static_cast<std::uint64_t>(kSchemaVersion))
      fail(ErrorKind::Config, "unsupported schema_version");
    if (j.contains("model")) cfg.model = model_config_from_json(j["model"], cfg.model);
    if (j.contains("mode")) cfg.mode = parse_mode(get_str(j["mode"], "mode"));
    if (j.contains("rank")) cfg.rank = get_count(j["rank"], "rank");
    if (j.contains("alpha")) cfg.alpha = opt_num(j["alpha"]);
    if (j.contains("a_std")) cfg.a_std = get_num(j["a_std"]);
    if (j.contains("optimizer")) {
      const Json& o = j["optimizer"];
      expect_object(o, "optimizer",
                    {"kind", "lr", "beta1", "beta2", "eps", "weight_decay", "warmup_steps"});
      auto& oc = cfg.optimizer;
      if (o.contains("kind")) oc.kind = get_str(o["kind"], "kind");
      if (o.contains("lr")) oc.lr = get_num(o["lr"]);
      if (o.contains("beta1")) oc.beta1 = get_num(o["beta1"]);
      if (o.contains("beta2")) oc.beta2 = get_num(o["beta2"]);
      if (o.contains("eps")) oc.eps = get_num(o["eps"]);
      if (o.contains("weight_decay")) oc.weight_decay = get_num(o["weight_decay"]);
      if (o.contains("warmup_steps")) oc.warmup_steps = get_count(o["warmup_steps"], "warmup_steps");
    }
    if (j.contains("steps")) cfg.steps = get_count(j["steps"], "steps");
    if (j.contains("seed")) cfg.seed = get_count(j["seed"], "seed");
    if (j.contains("task")) cfg.task = parse_task(get_str(j["task"], "task"));
    if (j.contains("n_examples")) cfg.n_examples = get_count(j["n_examples"], "n_examples");
    if (j.contains("eval_examples")) cfg.eval_examples = get_count(j["eval_examples"], "eval_examples");
    if (j.contains("equiv_every")) cfg.equiv_every = get_count(j["equiv_every"], "equiv_every");
    if (j.contains("report")) cfg.report_path = get_str(j["report"], "report");
    return cfg;
  });
}

Json to_json(const MemoryBreakdown& m) {
  Json layers = Json::array();
  for (const auto& lr : m.layers) layers.push_back(to_json(lr));
  return Json{{"activation_model", std::string(to_string(m.activation_model))},
              {"accounting_bytes_per_element", num(kAccountingBytesPerElement)},
              {"compute_precision", m.compute_precision},
              {"weight_bytes", num(m.weight_bytes)},
              {"trainable_state_bytes", num(m.trainable_state_bytes)},
              {"activation_bytes_linear", num(m.activation_bytes_linear)},
              {"activation_bytes_other", num(m.activation_bytes_other)},
              {"total_bytes", num(m.total_bytes)},
              {"linear_full_elements", num(m.linear_full_elements)},
              {"linear_lowrank_elements", num(m.linear_lowrank_elements)},
              {"recompute_flops", m.recompute_flops},
              {"layers", std::move(layers)}};
}

MemoryBreakdown memory_breakdown_from_json(const Json& j) {
  return guarded([&] {
    MemoryBreakdown m;
    m.activation_model = parse_activation_model(get_str(j.at("activation_model"), "activation_model"));
    m.compute_precision = get_str(j.at("compute_precision"), "compute_precision");
    m.weight_bytes = get_num(j.at("weight_bytes"));
    m.trainable_state_bytes = get_num(j.at("trainable_state_bytes"));
    m.activation_bytes_linear = get_num(j.at("activation_bytes_linear"));
    m.activation_bytes_other = get_num(j.at("activation_bytes_other"));
    m.total_bytes = get_num(j.at("total_bytes"));
    m.linear_full_elements = get_num(j.at("linear_full_elements"));
    m.linear_lowrank_elements = get_num(j.at("linear_lowrank_elements"));
    m.recompute_flops = get_bool(j.at("recompute_flops"), "recompute_flops");
    for (const auto& lr : j.at("layers")) m.layers.push_back(layer_from_json(lr));
    return m;
  });
}

Json to_json(const MeasuredActivations& m) {
  Json layers = Json::array();
  for (const auto& lr : m.layers) layers.push_back(to_json(lr));
  return Json{{"linear_full_elements", m.linear_full},
              {"linear_lowrank_elements", m.linear_lowrank},
              {"other_elements", m.other},
              {"breakdown", to_json(m.as_breakdown())},
              {"layers", std::move(layers)}};
}

Json to_json(const ReconcileReport& r) {
  return Json{{"analytic_full", r.analytic_full},
              {"analytic_lowrank", r.analytic_lowrank},
              {"measured_full", r.measured_full},
              {"measured_lowrank", r.measured_lowrank},
              {"measured_other", r.measured_other},
              {"paper_full", opt_num_json(r.paper_full)},
              {"paper_lowrank", opt_num_json(r.paper_lowrank)},
              {"paper_lowrank_ratio", opt_num_json(r.paper_lowrank_ratio)}};
}

Json to_json(const RunReport& rep) {
  Json curve = Json::array();
  for (double x : rep.loss_curve) curve.push_back(num(x));
  Json verdicts = Json::array();
  for (const auto& v : rep.equivalence)
    verdicts.push_back(Json{{"step", v.step},
                            {"check", v.check},
                            {"value", num(v.value)},
                            {"threshold", num(v.threshold)},
                            {"pass", v.pass}});
  Json memory{{"analytic", to_json(rep.memory.analytic)},
              {"analytic_paper_constant", to_json(rep.memory.analytic_paper_constant)},
              {"measured", rep.memory.measured ? to_json(*rep.memory.measured) : Json(nullptr)},
              {"reconcile", rep.memory.reconcile ? to_json(*rep.memory.reconcile) : Json(nullptr)}};
  return Json{{"schema_version", rep.schema_version},
              {"config", to_json(rep.config)},
              {"status", rep.status},
              {"error", rep.error},
              {"initial_loss", num(rep.initial_loss)},
              {"final_loss", num(rep.final_loss)},
              {"loss_curve", std::move(curve)},
              {"trainable", to_json(rep.trainable)},
              {"trainable_formula", to_json(rep.trainable_formula)},
              {"memory", std::move(memory)},
              {"equivalence", std::move(verdicts)},
              {"wall_clock_seconds", num(rep.wall_clock_seconds)}};
}

RunReport run_report_from_json(const Json& j) {
  return guarded([&] {
    RunReport rep;
    rep.schema_version = static_cast<int>(get_count(j.at("schema_version"), "schema_version"));
    if (rep.schema_version != kSchemaVersion) fail(ErrorKind::Config, "unsupported schema_version");
    rep.config = run_config_from_json(j.at("config"));
    rep.status = get_str(j.at("status"), "status");
    rep.error = get_str(j.at("error"), "error");
    rep.initial_loss = get_num(j.at("initial_loss"));
    rep.final_loss = get_num(j.at("final_loss"));
    for (const auto& x : j.at("loss_curve")) rep.loss_curve.push_back(get_num(x));
    rep.trainable = trainable_from_json(j.at("trainable"));
    rep.trainable_formula = trainable_from_json(j.at("trainable_formula"));
    const Json& mem = j.at("memory");
    rep.memory.analytic = memory_breakdown_from_json(mem.at("analytic"));
    rep.memory.analytic_paper_constant = memory_breakdown_from_json(mem.at("analytic_paper_constant"));
    if (!mem.at("measured").is_null())
      rep.memory.measured = memory_breakdown_from_json(mem.at("measured"));
    if (!mem.at("reconcile").is_null())
      rep.memory.reconcile = reconcile_from_json(mem.at("reconcile"));
    for (const auto& v : j.at("equivalence"))
      rep.equivalence.push_back({get_count(v.at("step"), "step"), get_str(v.at("check"), "check"),
                                 get_num(v.at("value")), get_num(v.at("threshold")),
                                 get_bool(v.at("pass"), "pass")});
    rep.wall_clock_seconds = get_num(j.at("wall_clock_seconds"));
    return rep;
  });
}

Json to_json(const SweepGrid& grid) {
  Json cells = Json::array();
  for (const auto& c : grid.cells)
    cells.push_back(Json{{"rank", c.rank},
                         {"lr", num(c.lr)},
                         {"seed", c.seed},
                         {"final_loss", num(c.final_loss)},
                         {"status", c.status},
                         {"error", c.error}});
  Json lrs = Json::array();
  for (double lr : grid.lrs) lrs.push_back(num(lr));
  return Json{{"schema_version", kSchemaVersion},
              {"base", to_json(grid.base)},
              {"ranks", grid.ranks},
              {"lrs", std::move(lrs)},
              {"cells", std::move(cells)}};
}

Json to_json(const MemReport& rep) {
  Json modes = Json::object();
  for (const auto& e : rep.entries)
    modes[std::string(to_string(e.mode))] = Json{{"paper_constant", to_json(e.paper_constant)},
                                                 {"per_layer_count", to_json(e.per_layer_count)}};
  Json out{{"schema_version", kSchemaVersion},
           {"model", to_json(rep.model)},
           {"rank", rep.rank},
           {"modifiers",
            {{"weight_bits", rep.modifiers.weight_bits},
             {"num_shards", rep.modifiers.num_shards},
             {"full_recompute", rep.modifiers.full_recompute}}},
           {"modes", std::move(modes)}};
  if (rep.probe_mode) {
    out["probe"] = Json{{"mode", std::string(to_string(*rep.probe_mode))},
                        {"measured", to_json(*rep.probe)},
                        {"reconcile", to_json(*rep.probe_reconcile)}};
  }
  return out;
}

Json to_json(const GradCheckReport& rep) {
  Json entries = Json::array();
  for (const auto& e : rep.entries)
    entries.push_back(
        Json{{"parameter", e.parameter}, {"checked", e.checked}, {"rel_error", num(e.rel_error)}});
  return Json{{"schema_version", kSchemaVersion},
              {"mode", std::string(to_string(rep.mode))},
              {"tolerance", num(rep.tolerance)},
              {"max_rel_error", num(rep.max_rel_error)},
              {"pass", rep.pass},
              {"entries", std::move(entries)}};
}

Json to_json(const std::vector<CheckVerdict>& verdicts) {
  Json checks = Json::array();
  bool all = true;
  for (const auto& v : verdicts) {
    all = all && v.pass;
    checks.push_back(Json{{"check", v.check},
                          {"value", num(v.value)},
                          {"threshold", num(v.threshold)},
                          {"pass", v.pass},
                          {"detail", v.detail}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"pass", all}, {"checks", std::move(checks)}};
}

Json checkpoint_to_json(const TransformerModel& model) {
  TransformerModel copy = model;
  Json tensors = Json::object();
  for (const auto& p : copy.parameters()) tensors[p.name] = tensor_json(*p.value);
  return Json{{"schema_version", kSchemaVersion},
              {"model", to_json(model.config())},
              {"mode", std::string(to_string(model.mode()))},
              {"rank", model.rank()},
              {"alpha", num(model.alpha())},
              {"tensors", std::move(tensors)}};
}

TransformerModel checkpoint_from_json(const Json& j) {
  return guarded([&] {
    expect_object(j, "checkpoint", {"schema_version", "model", "mode", "rank", "alpha", "tensors"});
    if (get_count(j.at("schema_version"), "schema_version") != static_cast<std::uint64_t>(kSchemaVersion))
      fail(ErrorKind::Config, "unsupported schema_version");
    const ModelConfig cfg = model_config_from_json(j.at("model"), ModelConfig{});
    const AdaptationMode mode = parse_mode(get_str(j.at("mode"), "mode"));
    const std::size_t rank = get_count(j.at("rank"), "rank");
    const double alpha = get_num(j.at("alpha"));
    AdapterOptions opts{mode, has_adapter(mode) ? rank : 1, std::nullopt, 1.0};
    if (has_adapter(mode)) opts.alpha = alpha;
    TransformerModel model = TransformerModel::build(cfg, opts, 0);
    const Json& tensors = j.at("tensors");
    const auto params = model.parameters();
    if (tensors.size() != params.size())
      fail(ErrorKind::Config, "checkpoint tensor count does not match the model");
    for (const auto& p : params) {
      if (!tensors.contains(p.name)) fail(ErrorKind::Config, "checkpoint lacks '" + p.name + "'");
      const Json& t = tensors.at(p.name);
      Shape shape;
      for (const auto& e : t.at("shape")) shape.push_back(get_count(e, "shape"));
      if (shape != p.value->shape())
        fail(ErrorKind::Config, "checkpoint tensor '" + p.name + "' has shape " + to_string(shape) +
                                    ", model expects " + to_string(p.value->shape()));
      const Json& data = t.at("data");
      if (data.size() != p.value->size())
        fail(ErrorKind::Config, "checkpoint tensor '" + p.name + "' has wrong element count");
      for (std::size_t i = 0; i < data.size(); ++i) (*p.value)[i] = get_num(data[i]);
      p.value->check_finite("checkpoint load");
    }
    return model;
  });
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace lorafa
