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

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/eval/report.hpp"
#include "trajlab/pipeline/config.hpp"
#include "trajlab/roadnet/network.hpp"
#include "trajlab/tessellate/partition.hpp"

namespace trajlab::pipeline {

using Logger = std::function<void(const std::string&)>;

// Artifact list with content hashes, written as manifest.json.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path root) : root_(std::move(root)) {}
  void add(const std::filesystem::path& file);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void mark_failed(const std::string& stage, const std::string& message);
  bool failed() const noexcept { return failed_; }
  nlohmann::json to_json() const;
  void write() const;

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::filesystem::path>> files_;
  nlohmann::json extra_ = nlohmann::json::object();
  bool failed_ = false;
  std::string stage_;
  std::string message_;
};

roadnet::RoadNetwork make_network(const NetworkSpec& spec);

struct DemandData {
  demandgen::TrajectoryDataset all;
  demandgen::TrajectoryDataset train;
  demandgen::TrajectoryDataset test;
};
DemandData make_demand(const roadnet::RoadNetwork& net, const ExperimentConfig& cfg);

// Everything a model trains and is evaluated on, in model granularity.
// The network is shared because domains and models point into it.
struct Workspace {
  std::shared_ptr<const roadnet::RoadNetwork> network;
  std::optional<tessellate::CellPartition> partition;
  models::Domain domain;
  demandgen::TrajectoryDataset train;
  demandgen::TrajectoryDataset test;
  demandgen::TrajectoryDataset population;  // train + test, for traffic states
  std::string net_hash;
};

Workspace make_workspace(roadnet::RoadNetwork net, const ExperimentConfig& cfg,
                         const demandgen::TrajectoryDataset& train_links,
                         const demandgen::TrajectoryDataset& test_links);
// Hash binding a model to its network (and partition at cell granularity).
std::string domain_hash(const roadnet::RoadNetwork& net,
                        const std::optional<tessellate::CellPartition>& part);

struct TrainOutput {
  models::TrainedModel model;
  std::vector<models::GailLogRow> gail_log;
  std::vector<double> epoch_loss;
  std::vector<double> maxent_gap;
  std::vector<std::string> warnings;
};

TrainOutput train_model(const Workspace& ws, const ModelSpec& spec, std::uint64_t seed,
                        std::size_t workers, const Logger& log = {});

// n trajectories; departures cycle through `departs_from` (typically the
// test set) so attentive models see realistic traffic contexts.
demandgen::TrajectoryDataset generate(const models::TrainedModel& m, std::size_t n,
                                      std::size_t max_len, std::uint64_t seed,
                                      const demandgen::TrajectoryDataset& departs_from,
                                      std::size_t workers);

struct GeneratedSet {
  std::string model;
  demandgen::TrajectoryDataset data;
  std::string net_hash;
  const models::TrainedModel* trained = nullptr;  // enables CPP when set
};

// One report scenario. Inputs must share real_hash; a mismatch is an
// EvalError. Per-model scoring errors are recorded in the entry.
eval::ScenarioEval compare_models(const std::string& scenario,
                                  const demandgen::TrajectoryDataset& real,
                                  const demandgen::TrajectoryDataset& reference,
                                  const std::string& real_hash,
                                  const std::vector<GeneratedSet>& generated,
                                  const EvalSpec& spec, std::size_t workers,
                                  std::optional<std::size_t> num_cells = std::nullopt);

void write_report(const eval::EvalReport& r, const std::filesystem::path& dir, Manifest* manifest);

// Full run into cfg.output_dir. Exceptions propagate after the manifest has
// been written with a FAILED marker.
void run_pipeline(const ExperimentConfig& cfg, const Logger& log = {});

}  // namespace trajlab::pipeline
