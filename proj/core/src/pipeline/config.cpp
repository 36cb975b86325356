// Copyright 2026 The TrajLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajlab/pipeline/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/parallel.hpp"

namespace trajlab::pipeline {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }
  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class E, class F>
void get_enum(Reader& r, const char* key, E& out, F parse) {
  std::string v;
  r.get(key, v);
  if (!v.empty()) {
    try {
      out = parse(v);
    } catch (const Error& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
  }
}

}  // namespace

double ModelSpec::learning_rate() const {
  if (lr) return *lr;
  switch (kind) {
    case models::ModelKind::RNN:
    case models::ModelKind::ARNN: return 1e-3;
    case models::ModelKind::TrajGAIL: return 5e-5;
    case models::ModelKind::SVF:
    case models::ModelKind::SAVF: return 0.1;
    default: return 0.0;
  }
}

models::GailConfig ModelSpec::gail_config(std::uint64_t seed, std::size_t workers) const {
  models::GailConfig g;
  g.iters = iters;
  g.samples = samples;
  g.d_updates = d_updates;
  g.g_updates = g_updates;
  g.net = net;
  g.lr = learning_rate();
  g.gamma = gamma;
  g.lambda = lambda;
  g.max_len = max_len;
  g.center_q = center_q;
  g.bc_epochs = bc_epochs;
  g.bc_lr = bc_lr;
  g.seed = seed;
  g.workers = workers;
  return g;
}

models::RnnTrainConfig ModelSpec::rnn_config(std::uint64_t seed, double link_travel_min) const {
  models::RnnTrainConfig r;
  r.epochs = epochs;
  r.batch_size = batch_size;
  r.lr = learning_rate();
  r.seed = seed;
  r.link_travel_min = link_travel_min;
  return r;
}

models::MaxEntConfig ModelSpec::maxent_config() const {
  models::MaxEntConfig m;
  m.mode = kind == models::ModelKind::SAVF ? models::MaxEntMode::SAVF : models::MaxEntMode::SVF;
  m.iters = maxent_iters;
  m.lr = learning_rate();
  m.tolerance = tolerance;
  m.horizon = horizon;
  return m;
}

json to_json(const ModelSpec& m) {
  json j = {{"kind", models::to_string(m.kind)}, {"lr", m.learning_rate()}};
  switch (m.kind) {
    case models::ModelKind::RNN:
    case models::ModelKind::ARNN:
      j["net"] = models::to_json(m.net);
      j["epochs"] = m.epochs;
      j["batch_size"] = m.batch_size;
      break;
    case models::ModelKind::TrajGAIL:
      j["net"] = models::to_json(m.net);
      j.update({{"iters", m.iters}, {"samples", m.samples}, {"d_updates", m.d_updates},
                {"g_updates", m.g_updates}, {"gamma", m.gamma}, {"lambda", m.lambda},
                {"max_len", m.max_len}, {"bc_epochs", m.bc_epochs}, {"bc_lr", m.bc_lr},
                {"center_q", m.center_q}});
      break;
    case models::ModelKind::SVF:
    case models::ModelKind::SAVF:
      j.update({{"maxent_iters", m.maxent_iters}, {"tolerance", m.tolerance}, {"horizon", m.horizon}});
      break;
    default:
      j.erase("lr");
      break;
  }
  return j;
}

ModelSpec model_spec_from_json(const json& j, ModelSpec d) {
  Reader r(j, "model");
  get_enum(r, "kind", d.kind, models::model_kind_from_string);
  if (const json* n = r.sub("net")) {
    try {
      d.net = models::net_config_from_json(*n, d.net);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("model.net: ") + e.what());
    } catch (const ContractError& e) {
      throw ConfigError(std::string("model.net: ") + e.what());
    }
  }
  double lr = -1.0;
  r.get("lr", lr);
  if (j.contains("lr")) d.lr = lr;
  r.get("epochs", d.epochs);
  r.get("batch_size", d.batch_size);
  r.get("iters", d.iters);
  r.get("samples", d.samples);
  r.get("d_updates", d.d_updates);
  r.get("g_updates", d.g_updates);
  r.get("gamma", d.gamma);
  r.get("lambda", d.lambda);
  r.get("max_len", d.max_len);
  r.get("bc_epochs", d.bc_epochs);
  r.get("bc_lr", d.bc_lr);
  r.get("center_q", d.center_q);
  r.get("maxent_iters", d.maxent_iters);
  r.get("tolerance", d.tolerance);
  r.get("horizon", d.horizon);
  r.finish();
  if (d.kind == models::ModelKind::ARNN) d.net.attention = true;
  if (d.lr && !(*d.lr > 0.0)) throw ConfigError("model.lr must be positive");
  return d;
}

void ExperimentConfig::validate() const {
  if (network.rows < 1 || network.cols < 1 || !(network.block_m > 0.0)) {
    throw ConfigError("network: rows, cols and block_m must be positive");
  }
  if (demand.n == 0) throw ConfigError("demand.n must be positive");
  if (!(demand.split_ratio > 0.0 && demand.split_ratio < 1.0)) {
    throw ConfigError("demand.split_ratio must lie in (0, 1)");
  }
  try {
    demand.choice.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("demand.route_choice: ") + e.what());
  }
  if (granularity == models::Granularity::Cell && !(cell_radius > 0.0)) {
    throw ConfigError("cell_radius must be positive");
  }
  std::set<models::ModelKind> kinds;
  for (const auto& m : models) {
    if (!kinds.insert(m.kind).second) {
      throw ConfigError(std::string("model listed twice: ") + models::to_string(m.kind));
    }
    const bool link_only = m.kind == models::ModelKind::SVF || m.kind == models::ModelKind::SAVF ||
                           m.kind == models::ModelKind::TrajGAIL;
    if (link_only && granularity != models::Granularity::Link) {
      throw ConfigError(std::string(models::to_string(m.kind)) + " needs link granularity");
    }
    if (m.kind == models::ModelKind::TrajGAIL) {
      try {
        m.gail_config(0, 1).validate();
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  for (auto k : eval.cpp_k) {
    if (k == 0) throw ConfigError("eval.cpp_k entries must be >= 1");
  }
}

json to_json(const ExperimentConfig& c, bool for_hash) {
  json choice = {{"kind", demandgen::to_string(c.demand.choice.kind)},
                 {"theta", c.demand.choice.theta},
                 {"alpha", c.demand.choice.alpha},
                 {"beta_cf", c.demand.choice.beta_cf},
                 {"gamma_cf", c.demand.choice.gamma_cf},
                 {"p", c.demand.choice.p}};
  json j = {
      {"seed", c.seed},
      {"scenario", c.scenario},
      {"output_dir", c.output_dir},
      {"network", {{"rows", c.network.rows}, {"cols", c.network.cols}, {"block_m", c.network.block_m}}},
      {"demand",
       {{"pattern", demandgen::to_string(c.demand.pattern)},
        {"route_choice", choice},
        {"n", c.demand.n},
        {"major_weight", c.demand.major_weight},
        {"background_weight", c.demand.background_weight},
        {"horizon_min", c.demand.horizon_min},
        {"link_travel_min", c.demand.link_travel_min},
        {"route_slack", c.demand.route_slack},
        {"route_cap", c.demand.route_cap},
        {"split_ratio", c.demand.split_ratio}}},
      {"granularity", models::to_string(c.granularity)},
      {"cell_radius", c.cell_radius},
      {"models", json::array()},
      {"eval",
       {{"generated", c.eval.generated},
        {"max_len", c.eval.max_len},
        {"reference", c.eval.reference_train ? "train" : "test"},
        {"cpp_k", c.eval.cpp_k},
        {"prediction_given", c.eval.prediction_given},
        {"prediction_samples", c.eval.prediction_samples}}}};
  for (const auto& m : c.models) j["models"].push_back(to_json(m));
  if (!for_hash) j["workers"] = c.workers;
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  Reader r(j, "config");
  r.get("seed", c.seed);
  r.get("workers", c.workers);
  r.get("scenario", c.scenario);
  r.get("output_dir", c.output_dir);
  if (const json* n = r.sub("network")) {
    Reader rn(*n, "network");
    rn.get("rows", c.network.rows);
    rn.get("cols", c.network.cols);
    rn.get("block_m", c.network.block_m);
    rn.finish();
  }
  if (const json* d = r.sub("demand")) {
    Reader rd(*d, "demand");
    get_enum(rd, "pattern", c.demand.pattern, demandgen::pattern_from_string);
    if (const json* ch = rd.sub("route_choice")) {
      Reader rc(*ch, "demand.route_choice");
      get_enum(rc, "kind", c.demand.choice.kind, demandgen::route_choice_from_string);
      rc.get("theta", c.demand.choice.theta);
      rc.get("alpha", c.demand.choice.alpha);
      rc.get("beta_cf", c.demand.choice.beta_cf);
      rc.get("gamma_cf", c.demand.choice.gamma_cf);
      rc.get("p", c.demand.choice.p);
      rc.finish();
    }
    rd.get("n", c.demand.n);
    rd.get("major_weight", c.demand.major_weight);
    rd.get("background_weight", c.demand.background_weight);
    rd.get("horizon_min", c.demand.horizon_min);
    rd.get("link_travel_min", c.demand.link_travel_min);
    rd.get("route_slack", c.demand.route_slack);
    rd.get("route_cap", c.demand.route_cap);
    rd.get("split_ratio", c.demand.split_ratio);
    rd.finish();
  }
  get_enum(r, "granularity", c.granularity, models::granularity_from_string);
  r.get("cell_radius", c.cell_radius);
  if (const json* ms = r.sub("models")) {
    if (!ms->is_array()) throw ConfigError("models: expected an array");
    c.models.clear();
    for (const auto& m : *ms) c.models.push_back(model_spec_from_json(m));
  }
  if (const json* e = r.sub("eval")) {
    Reader re(*e, "eval");
    re.get("generated", c.eval.generated);
    re.get("max_len", c.eval.max_len);
    std::string ref;
    re.get("reference", ref);
    if (!ref.empty()) {
      if (ref != "train" && ref != "test") throw ConfigError("eval.reference must be train or test");
      c.eval.reference_train = ref == "train";
    }
    re.get("cpp_k", c.eval.cpp_k);
    re.get("prediction_given", c.eval.prediction_given);
    re.get("prediction_samples", c.eval.prediction_samples);
    re.finish();
  }
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

void apply_environment(ExperimentConfig& c) {
  auto parse = [](const char* name) -> std::optional<std::uint64_t> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (*end != '\0') throw ConfigError(std::string(name) + " must be a non-negative integer");
    return x;
  };
  if (auto s = parse("TRAJLAB_SEED")) c.seed = *s;
  if (auto w = parse("TRAJLAB_WORKERS")) {
    c.workers = static_cast<std::size_t>(*w);
  } else {
    c.workers = default_workers();
  }
  if (c.workers == 0) c.workers = 1;
}

}  // namespace trajlab::pipeline
