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

// trajlab: command-line front end.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/hashing.hpp"
#include "trajlab/common/random.hpp"
#include "trajlab/pipeline/pipeline.hpp"
#include "trajlab/roadnet/network_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTraining = 3;
constexpr int kExitEval = 4;

void log_line(const std::string& s) { std::cerr << "[trajlab] " << s << '\n'; }

// Flags that were given on the command line, as a partial config document.
class FlagLayer {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& pointer,
           const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    setters_.push_back([opt, value, pointer](json& j) {
      if (opt->count() > 0) j[json::json_pointer(pointer)] = *value;
    });
  }
  json document() const {
    json j = json::object();
    for (const auto& s : setters_) s(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> setters_;
};

struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "JSON config; overrides flags");
  app->add_option("--seed", c.seed, "master seed; overrides everything");
  app->add_option("--workers", c.workers, "worker threads (results do not depend on it)");
  app->add_option("--out", c.out, "output directory");
}

void add_network_flags(CLI::App* app, FlagLayer& f) {
  f.add<std::size_t>(app, "--rows", "/network/rows", "grid rows");
  f.add<std::size_t>(app, "--cols", "/network/cols", "grid columns");
  f.add<double>(app, "--block-m", "/network/block_m", "block length in meters");
}

void add_demand_flags(CLI::App* app, FlagLayer& f) {
  f.add<std::string>(app, "--pattern", "/demand/pattern", "SingleOD|OneWayMultiOD|TwoWayMultiOD");
  f.add<std::string>(app, "--route-choice", "/demand/route_choice/kind",
                     "Fixed|Logit|CLogit|Proportional|Binomial");
  f.add<double>(app, "--theta", "/demand/route_choice/theta", "logit scale");
  f.add<double>(app, "--alpha", "/demand/route_choice/alpha", "proportional exponent");
  f.add<double>(app, "--beta-cf", "/demand/route_choice/beta_cf", "C-logit weight");
  f.add<double>(app, "--gamma-cf", "/demand/route_choice/gamma_cf", "C-logit exponent");
  f.add<double>(app, "--p", "/demand/route_choice/p", "binomial success probability");
  f.add<std::size_t>(app, "--n", "/demand/n", "number of trajectories");
  f.add<double>(app, "--split-ratio", "/demand/split_ratio", "train fraction");
  f.add<double>(app, "--horizon-min", "/demand/horizon_min", "departure horizon (min)");
  f.add<double>(app, "--major-weight", "/demand/major_weight", "major OD weight");
  f.add<double>(app, "--background-weight", "/demand/background_weight", "background OD weight");
}

void add_granularity_flags(CLI::App* app, FlagLayer& f) {
  f.add<std::string>(app, "--granularity", "/granularity", "link|cell");
  f.add<double>(app, "--radius", "/cell_radius", "cell radius R (m)");
}

struct ModelFlags {
  std::string kind;
  FlagLayer f;
};

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--model", m.kind, "TRN|MMC|RNN|ARNN|SVF|SAVF|TrajGAIL")->required();
  auto& f = m.f;
  f.add<std::string>(app, "--cell", "/net/cell", "GRU|LSTM");
  f.add<std::size_t>(app, "--hidden", "/net/hidden", "hidden units");
  f.add<std::size_t>(app, "--layers", "/net/layers", "recurrent layers");
  f.add<double>(app, "--lr", "/lr", "learning rate");
  f.add<std::size_t>(app, "--epochs", "/epochs", "RNN epochs");
  f.add<std::size_t>(app, "--batch-size", "/batch_size", "RNN batch size");
  f.add<std::size_t>(app, "--iters", "/iters", "TrajGAIL iterations");
  f.add<std::size_t>(app, "--samples", "/samples", "TrajGAIL rollouts per iteration");
  f.add<std::size_t>(app, "--d-updates", "/d_updates", "discriminator updates");
  f.add<std::size_t>(app, "--g-updates", "/g_updates", "generator updates");
  f.add<double>(app, "--gamma", "/gamma", "discount");
  f.add<double>(app, "--lambda", "/lambda", "entropy weight");
  f.add<std::size_t>(app, "--bc-epochs", "/bc_epochs", "behavior-cloning warm start");
  f.add<std::size_t>(app, "--maxent-iters", "/maxent_iters", "MaxEnt iterations");
}

pipeline::ExperimentConfig merge(const Common& c, const json& flags) {
  pipeline::ExperimentConfig cfg;
  pipeline::apply_environment(cfg);
  cfg = pipeline::config_from_json(flags, cfg);
  if (!c.config_file.empty()) cfg = pipeline::load_config(c.config_file, cfg);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = std::max<std::size_t>(1, *c.workers);
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

// Every file under dir except the manifest itself, hashed.
void refresh_manifest(const fs::path& dir) {
  pipeline::Manifest man(dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) man.add(f);
  man.write();
}

void write_config(const pipeline::ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream os(fs::path(cfg.output_dir) / "config.json");
  os << pipeline::to_json(cfg, true).dump(2) << '\n';
}

pipeline::Workspace load_workspace(const pipeline::ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  auto net = roadnet::load_network(out / "network.json");
  const auto train = demandgen::read_jsonl(out / "train.jsonl");
  const auto test = demandgen::read_jsonl(out / "test.jsonl");
  return pipeline::make_workspace(std::move(net), cfg, train, test);
}

const pipeline::ModelSpec& find_spec(pipeline::ExperimentConfig& cfg, const std::string& kind,
                                     const json& overrides) {
  const auto k = models::model_kind_from_string(kind);
  for (auto& m : cfg.models) {
    if (m.kind == k) {
      m = pipeline::model_spec_from_json(overrides, m);
      return m;
    }
  }
  json j = overrides;
  j["kind"] = kind;
  cfg.models.push_back(pipeline::model_spec_from_json(j));
  return cfg.models.back();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"trajlab: synthetic urban trajectories, generative models and metrics"};
  app.require_subcommand(1);

  Common common;
  FlagLayer flags;
  ModelFlags mflags;
  std::size_t sample_n = 0, sample_max_len = 0;
  std::string report_path;

  auto* net = app.add_subcommand("net", "build a grid network");
  add_common(net, common);
  add_network_flags(net, flags);

  auto* demand = app.add_subcommand("demand", "generate and split a trajectory dataset");
  add_common(demand, common);
  add_network_flags(demand, flags);
  add_demand_flags(demand, flags);

  auto* tess = app.add_subcommand("tessellate", "cluster the network into cells");
  add_common(tess, common);
  add_granularity_flags(tess, flags);

  auto* train = app.add_subcommand("train", "train one model on <out>/train.jsonl");
  add_common(train, common);
  add_granularity_flags(train, flags);
  add_model_flags(train, mflags);

  auto* sample = app.add_subcommand("sample", "sample trajectories from a trained model");
  add_common(sample, common);
  add_granularity_flags(sample, flags);
  sample->add_option("--model", mflags.kind, "model kind under <out>/models")->required();
  sample->add_option("--n", sample_n, "trajectories (default: test size)");
  sample->add_option("--max-len", sample_max_len, "length cap (default: twice the longest)");

  auto* evalc = app.add_subcommand("eval", "score generated sets against the test set");
  add_common(evalc, common);
  add_granularity_flags(evalc, flags);
  flags.add<std::string>(evalc, "--reference", "/eval/reference", "train|test");

  auto* run = app.add_subcommand("run", "full pipeline: net, demand, train, sample, eval");
  add_common(run, common);
  add_network_flags(run, flags);
  add_demand_flags(run, flags);
  add_granularity_flags(run, flags);

  auto* report = app.add_subcommand("report", "re-render report.md and ccdf.csv from report.json");
  report->add_option("--report", report_path, "path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (report->parsed()) {
    std::ifstream is(report_path);
    if (!is) throw EvalError("cannot open " + report_path);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw EvalError(std::string("report is not valid JSON: ") + e.what());
    }
    const auto r = eval::report_from_json(j);
    pipeline::write_report(r, fs::path(report_path).parent_path(), nullptr);
    log_line("rendered " + (fs::path(report_path).parent_path() / "report.md").string());
    return kExitOk;
  }

  auto cfg = merge(common, flags.document());
  const fs::path out(cfg.output_dir);

  if (run->parsed()) {
    pipeline::run_pipeline(cfg, log_line);
    return kExitOk;
  }
  if (net->parsed()) {
    write_config(cfg);
    roadnet::save_network(pipeline::make_network(cfg.network), out / "network.json");
    refresh_manifest(out);
    return kExitOk;
  }
  if (demand->parsed()) {
    write_config(cfg);
    const auto network = pipeline::make_network(cfg.network);
    roadnet::save_network(network, out / "network.json");
    const auto d = pipeline::make_demand(network, cfg);
    demandgen::write_jsonl(d.all, out / "dataset.jsonl");
    demandgen::write_jsonl(d.train, out / "train.jsonl");
    demandgen::write_jsonl(d.test, out / "test.jsonl");
    log_line("demand: " + std::to_string(d.train.size()) + " train / " +
             std::to_string(d.test.size()) + " test");
    refresh_manifest(out);
    return kExitOk;
  }
  if (tess->parsed()) {
    cfg.granularity = models::Granularity::Cell;
    const auto ws = load_workspace(cfg);
    tessellate::save_partition(*ws.partition, out / "partition.json");
    demandgen::write_jsonl(ws.train, out / "train_cells.jsonl");
    demandgen::write_jsonl(ws.test, out / "test_cells.jsonl");
    log_line("tessellate: " + std::to_string(ws.partition->size()) + " cells");
    refresh_manifest(out);
    return kExitOk;
  }
  if (train->parsed()) {
    const auto& spec = find_spec(cfg, mflags.kind, mflags.f.document());
    cfg.validate();
    const auto ws = load_workspace(cfg);
    const auto kind_id = static_cast<std::uint64_t>(spec.kind);
    auto to = pipeline::train_model(ws, spec, derive_seed(cfg.seed, pipeline::streams::kModel, kind_id),
                                    cfg.workers, log_line);
    const fs::path dir = out / "models" / mflags.kind;
    models::save_model(dir, to.model, ws.net_hash);
    if (!to.gail_log.empty()) {
      std::ofstream os(dir / "training_log.csv");
      models::write_training_log(os, to.gail_log);
    }
    refresh_manifest(out);
    return kExitOk;
  }
  if (sample->parsed()) {
    const auto ws = load_workspace(cfg);
    const auto m = models::load_model(out / "models" / mflags.kind, ws.domain, ws.net_hash);
    std::size_t longest = 0;
    for (const auto& t : ws.population) longest = std::max(longest, t.path.size());
    const std::size_t n = sample_n ? sample_n : ws.test.size();
    const std::size_t max_len = sample_max_len ? sample_max_len : std::max<std::size_t>(2, 2 * longest);
    const auto g = pipeline::generate(
        m, n, max_len, derive_seed(cfg.seed, pipeline::streams::kSample, static_cast<std::uint64_t>(m.kind)),
        ws.test, cfg.workers);
    fs::create_directories(out / "generated");
    demandgen::write_jsonl(g, out / "generated" / (mflags.kind + ".jsonl"));
    std::ofstream(out / "generated" / (mflags.kind + ".meta.json"))
        << json{{"net_hash", ws.net_hash}, {"model", mflags.kind}}.dump(2) << '\n';
    refresh_manifest(out);
    return kExitOk;
  }
  if (evalc->parsed()) {
    const auto ws = load_workspace(cfg);
    std::vector<models::TrainedModel> trained;
    std::vector<pipeline::GeneratedSet> gens;
    std::vector<fs::path> files;
    if (fs::exists(out / "generated")) {
      for (const auto& e : fs::directory_iterator(out / "generated")) {
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    trained.reserve(files.size());
    for (const auto& f : files) {
      const std::string name = f.stem().string();
      std::string hash = ws.net_hash;
      const fs::path meta = f.parent_path() / (name + ".meta.json");
      if (fs::exists(meta)) {
        std::ifstream is(meta);
        hash = json::parse(is).at("net_hash").get<std::string>();
      }
      pipeline::GeneratedSet g{name, demandgen::read_jsonl(f), hash, nullptr};
      if (fs::exists(out / "models" / name / "manifest.json")) {
        trained.push_back(models::load_model(out / "models" / name, ws.domain, ws.net_hash));
        g.trained = &trained.back();
      }
      gens.push_back(std::move(g));
    }
    if (gens.empty()) throw EvalError("no generated sets under " + (out / "generated").string());
    eval::EvalReport r;
    r.metadata = {{"seed", cfg.seed}, {"train", ws.train.size()}, {"test", ws.test.size()}};
    std::optional<std::size_t> cells;
    if (ws.partition) cells = ws.partition->size();
    r.scenarios.push_back(pipeline::compare_models(cfg.scenario, ws.test,
                                                   cfg.eval.reference_train ? ws.train : ws.test,
                                                   ws.net_hash, gens, cfg.eval, cfg.workers, cells));
    pipeline::write_report(r, out, nullptr);
    refresh_manifest(out);
    return kExitOk;
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    log_line(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const TrainingError& e) {
    log_line(std::string("training diverged: ") + e.what());
    return kExitTraining;
  } catch (const EvalError& e) {
    log_line(std::string("evaluation error: ") + e.what());
    return kExitEval;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return kExitFailure;
  }
}
