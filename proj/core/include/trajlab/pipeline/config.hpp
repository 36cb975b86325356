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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/demandgen/demand.hpp"
#include "trajlab/demandgen/route_choice.hpp"
#include "trajlab/models/model.hpp"

namespace trajlab::pipeline {

struct NetworkSpec {
  std::size_t rows = 4;
  std::size_t cols = 4;
  double block_m = 100.0;
};

struct DemandSpec {
  demandgen::PatternKind pattern = demandgen::PatternKind::SingleOD;
  demandgen::RouteChoiceModel choice;
  std::size_t n = 20000;
  double major_weight = 10.0;
  double background_weight = 1.0;
  double horizon_min = 60.0;
  double link_travel_min = 1.0;
  std::size_t route_slack = 0;
  std::size_t route_cap = 20;
  double split_ratio = 0.7;
};

// Hyperparameters of one model; unset learning rates take the kind default.
struct ModelSpec {
  models::ModelKind kind = models::ModelKind::MMC;
  models::NetConfig net;
  std::optional<double> lr;
  // RNN / ARNN
  std::size_t epochs = 30;
  std::size_t batch_size = 500;
  // TrajGAIL
  std::size_t iters = 20000;
  std::size_t samples = 20000;
  std::size_t d_updates = 2;
  std::size_t g_updates = 6;
  double gamma = 0.95;
  double lambda = 0.01;
  std::size_t max_len = 0;
  std::size_t bc_epochs = 0;
  double bc_lr = 1e-3;
  bool center_q = false;
  // MaxEnt
  std::size_t maxent_iters = 200;
  double tolerance = 1e-3;
  std::size_t horizon = 0;

  double learning_rate() const;
  models::GailConfig gail_config(std::uint64_t seed, std::size_t workers) const;
  models::RnnTrainConfig rnn_config(std::uint64_t seed, double link_travel_min) const;
  models::MaxEntConfig maxent_config() const;
};

struct EvalSpec {
  std::size_t generated = 0;  // 0: size of the test set
  std::size_t max_len = 0;    // 0: twice the longest real trajectory
  bool reference_train = true;
  std::vector<std::size_t> cpp_k = {1, 2, 3};
  std::size_t prediction_given = 0;  // 0 disables prefix-continuation scoring
  std::size_t prediction_samples = 100;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // never affects results
  std::string scenario = "scenario";
  std::string output_dir = "trajlab_out";
  NetworkSpec network;
  DemandSpec demand;
  models::Granularity granularity = models::Granularity::Link;
  double cell_radius = 150.0;
  std::vector<ModelSpec> models;
  EvalSpec eval;

  void validate() const;
};

nlohmann::json to_json(const ModelSpec& m);
ModelSpec model_spec_from_json(const nlohmann::json& j, ModelSpec defaults = {});

// Full config including workers; `for_hash` drops it.
nlohmann::json to_json(const ExperimentConfig& c, bool for_hash = false);
// Unknown keys and wrong types are ConfigErrors. Keys absent from j keep
// their value in `base`, which is how file-over-flags layering works.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

// Fallbacks from TRAJLAB_SEED / TRAJLAB_WORKERS (workers default to the
// hardware concurrency).
void apply_environment(ExperimentConfig& c);

// Stream ids for derive_seed; fixed so artifacts are stable across versions.
namespace streams {
inline constexpr std::uint64_t kDemand = 11;
inline constexpr std::uint64_t kSplit = 12;
inline constexpr std::uint64_t kModel = 13;
inline constexpr std::uint64_t kSample = 14;
inline constexpr std::uint64_t kPredict = 15;
}  // namespace streams

}  // namespace trajlab::pipeline
