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

#include "trajlab/pipeline/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/hashing.hpp"
#include "trajlab/common/random.hpp"
#include "trajlab/roadnet/network_io.hpp"

namespace trajlab::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

void Manifest::add(const fs::path& file) {
  const std::string rel = fs::relative(file, root_).generic_string();
  for (auto& f : files_) {
    if (f.first == rel) return;
  }
  files_.emplace_back(rel, file);
}

void Manifest::mark_failed(const std::string& stage, const std::string& message) {
  failed_ = true;
  stage_ = stage;
  message_ = message;
}

json Manifest::to_json() const {
  json j = {{"status", failed_ ? "FAILED" : "OK"}, {"artifacts", json::array()}};
  if (failed_) {
    j["failed_stage"] = stage_;
    j["error"] = message_;
  }
  for (const auto& [rel, path] : files_) {
    if (!fs::exists(path)) continue;
    j["artifacts"].push_back(
        {{"path", rel}, {"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}});
  }
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  return j;
}

void Manifest::write() const {
  std::ofstream os(root_ / "manifest.json");
  os << to_json().dump(2) << '\n';
  if (!os) throw IoError("cannot write manifest in " + root_.string());
}

roadnet::RoadNetwork make_network(const NetworkSpec& spec) {
  return roadnet::build_grid(spec.rows, spec.cols, spec.block_m);
}

DemandData make_demand(const roadnet::RoadNetwork& net, const ExperimentConfig& cfg) {
  const auto pattern = demandgen::make_pattern(net, cfg.demand.pattern, cfg.demand.major_weight,
                                               cfg.demand.background_weight);
  demandgen::GeneratorConfig g;
  g.n = cfg.demand.n;
  g.seed = derive_seed(cfg.seed, streams::kDemand);
  g.depart_horizon_min = cfg.demand.horizon_min;
  g.link_travel_min = cfg.demand.link_travel_min;
  g.route_slack = cfg.demand.route_slack;
  g.route_cap = cfg.demand.route_cap;
  g.workers = cfg.workers;
  DemandData d;
  d.all = demandgen::generate_dataset(net, pattern, cfg.demand.choice, g);
  auto [train, test] = demandgen::split_train_test(d.all, cfg.demand.split_ratio,
                                                   derive_seed(cfg.seed, streams::kSplit));
  d.train = std::move(train);
  d.test = std::move(test);
  return d;
}

std::string domain_hash(const roadnet::RoadNetwork& net,
                        const std::optional<tessellate::CellPartition>& part) {
  if (!part) return net.hash();
  return sha256_hex(net.hash() + tessellate::to_json(*part).dump());
}

Workspace make_workspace(roadnet::RoadNetwork net, const ExperimentConfig& cfg,
                         const demandgen::TrajectoryDataset& train_links,
                         const demandgen::TrajectoryDataset& test_links) {
  Workspace ws;
  ws.network = std::make_shared<const roadnet::RoadNetwork>(std::move(net));
  if (cfg.granularity == models::Granularity::Cell) {
    const auto pts = tessellate::network_points(*ws.network, cfg.cell_radius);
    ws.partition = tessellate::cluster_points(pts, cfg.cell_radius);
    ws.train = tessellate::to_cell_dataset(*ws.network, train_links, *ws.partition);
    ws.test = tessellate::to_cell_dataset(*ws.network, test_links, *ws.partition);
    ws.domain = models::Domain::cells(ws.partition->size());
  } else {
    ws.train = train_links;
    ws.test = test_links;
    ws.domain = models::Domain::links(*ws.network);
  }
  ws.population = ws.train;
  ws.population.insert(ws.population.end(), ws.test.begin(), ws.test.end());
  ws.net_hash = domain_hash(*ws.network, ws.partition);
  return ws;
}

TrainOutput train_model(const Workspace& ws, const ModelSpec& spec, std::uint64_t seed,
                        std::size_t workers, const Logger& log) {
  TrainOutput out;
  out.model.kind = spec.kind;
  out.model.seed = seed;
  out.model.config = to_json(spec);
  const char* name = models::to_string(spec.kind);
  switch (spec.kind) {
    case models::ModelKind::TRN:
    case models::ModelKind::MMC:
      out.model.model = models::TransitionMatrix::fit(ws.domain, ws.train);
      break;
    case models::ModelKind::RNN:
    case models::ModelKind::ARNN: {
      models::NetConfig net = spec.net;
      net.attention = spec.kind == models::ModelKind::ARNN;
      auto policy = models::SequencePolicy::create(ws.domain, net, seed);
      const auto rc = spec.rnn_config(seed, 1.0);
      const auto hist = models::rnn_train(policy, ws.train, rc, &ws.population);
      out.epoch_loss = hist.epoch_loss;
      if (log && !hist.epoch_loss.empty()) {
        log(std::string(name) + ": final epoch loss " + std::to_string(hist.epoch_loss.back()));
      }
      out.model.model = std::move(policy);
      break;
    }
    case models::ModelKind::SVF:
    case models::ModelKind::SAVF: {
      models::MaxEntHistory hist;
      out.model.model = models::maxent_train(ws.domain, ws.train, spec.maxent_config(), &hist);
      out.maxent_gap = hist.gap;
      if (!hist.converged) {
        out.warnings.push_back(std::string(name) + ": visitation gap above tolerance after " +
                               std::to_string(spec.maxent_iters) + " iterations");
      }
      break;
    }
    case models::ModelKind::TrajGAIL: {
      const auto gc = spec.gail_config(seed, workers);
      auto bundle = models::TrajGailBundle::create(ws.domain, gc.net, gc.gamma, gc.lambda, seed);
      const auto res = models::gail_train(bundle, ws.train, gc, [&](const models::GailLogRow& r) {
        if (log && (r.iter % 100 == 0 || r.iter + 1 == gc.iters)) {
          std::ostringstream os;
          os << name << " iter " << r.iter << " J_D=" << r.j_discrim << " J_V=" << r.j_value
             << " J_P=" << r.j_policy << " routes=" << r.unique_routes;
          log(os.str());
        }
      });
      out.gail_log = res.log;
      out.warnings = res.warnings;
      out.model.model = std::move(bundle);
      break;
    }
  }
  if (log) {
    for (const auto& w : out.warnings) log("warning: " + w);
  }
  return out;
}

demandgen::TrajectoryDataset generate(const models::TrainedModel& m, std::size_t n,
                                      std::size_t max_len, std::uint64_t seed,
                                      const demandgen::TrajectoryDataset& departs_from,
                                      std::size_t workers) {
  models::ModelRunner runner(m, workers);
  std::vector<double> departs;
  if (!departs_from.empty()) {
    departs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) departs.push_back(departs_from[i % departs_from.size()].depart);
  }
  models::RolloutConfig rc;
  rc.n = n;
  rc.max_len = max_len;
  rc.seed = seed;
  return runner.sample(rc, departs);
}

eval::ScenarioEval compare_models(const std::string& scenario,
                                  const demandgen::TrajectoryDataset& real,
                                  const demandgen::TrajectoryDataset& reference,
                                  const std::string& real_hash,
                                  const std::vector<GeneratedSet>& generated, const EvalSpec& spec,
                                  std::size_t workers, std::optional<std::size_t> num_cells) {
  if (real.empty()) throw EvalError("compare_models: empty real dataset");
  eval::ScenarioEval s;
  s.scenario = scenario;
  s.real_entropy = eval::transition_entropy(real);
  s.real_size = real.size();
  std::size_t longest = 0;
  for (const auto& t : real) longest = std::max(longest, t.path.size());
  for (const auto& g : generated) {
    if (g.net_hash != real_hash) {
      throw EvalError("compare_models: " + g.model + " was generated on a different network");
    }
  }
  for (const auto& g : generated) {
    eval::ModelEval e;
    try {
      e = eval::evaluate_generated(g.model, g.data, real, reference, workers);
      if (g.trained) {
        models::ModelRunner runner(*g.trained, workers);
        std::vector<std::uint32_t> ctx;
        for (const auto& t : real) ctx.push_back(runner.context_for(t.depart));
        for (auto k : spec.cpp_k) e.cpp.push_back(eval::cpp_k(runner.model(), real, k, 0, ctx));
        if (spec.prediction_given > 0) {
          eval::PredictionConfig pc;
          pc.given = spec.prediction_given;
          pc.samples = spec.prediction_samples;
          pc.max_len = spec.max_len ? spec.max_len : std::max<std::size_t>(2, 2 * longest);
          pc.seed = derive_seed(g.trained->seed, streams::kPredict);
          e.prediction = eval::prediction_score_eval(runner.model(), real, pc, ctx).by_length;
        }
      }
      if (num_cells) e.mean_revisit = eval::region_metrics(g.data, *num_cells).mean_revisit;
    } catch (const EvalError& err) {
      e = eval::ModelEval{};
      e.model = g.model;
      e.generated = g.data.size();
      e.error = err.what();
    }
    s.models.push_back(std::move(e));
  }
  return s;
}

void write_report(const eval::EvalReport& r, const fs::path& dir, Manifest* manifest) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    os << eval::to_json(r).dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "report.md");
    os << eval::render_markdown(r);
  }
  {
    std::ofstream os(dir / "ccdf.csv");
    eval::write_ccdf_csv(os, r);
  }
  if (manifest) {
    for (const char* f : {"report.json", "report.md", "ccdf.csv"}) manifest->add(dir / f);
  }
}

namespace {

void write_csv_series(const fs::path& path, const char* header, const std::vector<double>& v) {
  std::ofstream os(path);
  os.precision(17);
  os << header << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) os << i << ',' << v[i] << '\n';
}

}  // namespace

void run_pipeline(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  Manifest man(out);
  std::string stage = "config";
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  try {
    {
      std::ofstream os(out / "config.json");
      os << to_json(cfg, true).dump(2) << '\n';
    }
    man.add(out / "config.json");

    stage = "network";
    auto net = make_network(cfg.network);
    roadnet::save_network(net, out / "network.json");
    man.add(out / "network.json");
    say("network: " + std::to_string(net.num_links()) + " links");

    stage = "demand";
    const DemandData d = make_demand(net, cfg);
    demandgen::write_jsonl(d.all, out / "dataset.jsonl");
    demandgen::write_jsonl(d.train, out / "train.jsonl");
    demandgen::write_jsonl(d.test, out / "test.jsonl");
    for (const char* f : {"dataset.jsonl", "train.jsonl", "test.jsonl"}) man.add(out / f);
    man.set("split", {{"train", d.train.size()}, {"test", d.test.size()}});
    say("demand: " + std::to_string(d.train.size()) + " train / " + std::to_string(d.test.size()) +
        " test");

    stage = "tessellate";
    const Workspace ws = make_workspace(std::move(net), cfg, d.train, d.test);
    if (ws.partition) {
      tessellate::save_partition(*ws.partition, out / "partition.json");
      demandgen::write_jsonl(ws.train, out / "train_cells.jsonl");
      demandgen::write_jsonl(ws.test, out / "test_cells.jsonl");
      for (const char* f : {"partition.json", "train_cells.jsonl", "test_cells.jsonl"}) {
        man.add(out / f);
      }
      say("tessellate: " + std::to_string(ws.partition->size()) + " cells");
    }

    std::size_t longest = 0;
    for (const auto& t : ws.population) longest = std::max(longest, t.path.size());
    const std::size_t max_len = cfg.eval.max_len ? cfg.eval.max_len : std::max<std::size_t>(2, 2 * longest);
    const std::size_t n_gen = cfg.eval.generated ? cfg.eval.generated : ws.test.size();

    std::vector<models::TrainedModel> trained;
    std::vector<GeneratedSet> gens;
    trained.reserve(cfg.models.size());
    for (const auto& spec : cfg.models) {
      const std::string name = models::to_string(spec.kind);
      const auto kind_id = static_cast<std::uint64_t>(spec.kind);
      stage = "train:" + name;
      say("train: " + name);
      TrainOutput to = train_model(ws, spec, derive_seed(cfg.seed, streams::kModel, kind_id),
                                   cfg.workers, log);
      const fs::path mdir = out / "models" / name;
      models::save_model(mdir, to.model, ws.net_hash);
      man.add(mdir / "params.tlab");
      man.add(mdir / "manifest.json");
      if (!to.gail_log.empty()) {
        std::ofstream os(mdir / "training_log.csv");
        models::write_training_log(os, to.gail_log);
        man.add(mdir / "training_log.csv");
      }
      if (!to.epoch_loss.empty()) {
        write_csv_series(mdir / "loss.csv", "epoch,loss", to.epoch_loss);
        man.add(mdir / "loss.csv");
      }
      if (!to.maxent_gap.empty()) {
        write_csv_series(mdir / "gap.csv", "iter,gap", to.maxent_gap);
        man.add(mdir / "gap.csv");
      }
      if (!to.warnings.empty()) man.set("warnings_" + name, to.warnings);
      trained.push_back(std::move(to.model));

      stage = "sample:" + name;
      auto g = generate(trained.back(), n_gen, max_len,
                        derive_seed(cfg.seed, streams::kSample, kind_id), ws.test, cfg.workers);
      const fs::path gpath = out / "generated" / (name + ".jsonl");
      fs::create_directories(gpath.parent_path());
      demandgen::write_jsonl(g, gpath);
      man.add(gpath);
      gens.push_back({name, std::move(g), ws.net_hash, nullptr});
    }
    for (std::size_t i = 0; i < gens.size(); ++i) gens[i].trained = &trained[i];

    stage = "eval";
    eval::EvalReport report;
    report.metadata = {{"seed", cfg.seed},
                       {"train", ws.train.size()},
                       {"test", ws.test.size()},
                       {"generated", n_gen},
                       {"max_len", max_len},
                       {"reference", cfg.eval.reference_train ? "train" : "test"},
                       {"granularity", models::to_string(cfg.granularity)}};
    std::optional<std::size_t> cells;
    if (ws.partition) cells = ws.partition->size();
    report.scenarios.push_back(compare_models(cfg.scenario, ws.test,
                                              cfg.eval.reference_train ? ws.train : ws.test,
                                              ws.net_hash, gens, cfg.eval, cfg.workers, cells));
    write_report(report, out, &man);
    say("eval: report written to " + (out / "report.md").string());
  } catch (const std::exception& e) {
    man.mark_failed(stage, e.what());
    man.write();
    throw;
  }
  man.write();
}

}  // namespace trajlab::pipeline
