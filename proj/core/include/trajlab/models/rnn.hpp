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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/policy_net.hpp"
#include "trajlab/models/rollout.hpp"

namespace trajlab::models {

// Recurrent next-location model. With cfg.attention the initial state and a
// per-step context come from the traffic state at departure.
struct SequencePolicy {
  SequenceNet net;
  nd::ParameterSet params;
  TrafficContexts contexts;  // empty unless attentive

  static SequencePolicy create(const Domain& domain, const NetConfig& cfg, std::uint64_t seed,
                               const std::string& prefix = "policy");
  const Domain& domain() const noexcept { return net.domain(); }
  bool attentive() const noexcept { return net.config().attention; }
};

// Owns what a NetSession points at. Not movable.
class PolicySampler {
 public:
  PolicySampler(const SequencePolicy& policy, std::span<const double> departs,
                std::size_t workers);
  PolicySampler(const PolicySampler&) = delete;
  PolicySampler& operator=(const PolicySampler&) = delete;

  NetSession& session() { return *session_; }
  // Context id per departure given at construction (all 0 without attention).
  const std::vector<std::uint32_t>& contexts() const noexcept { return local_; }
  std::uint32_t context_for(double depart) const;

 private:
  const SequencePolicy& policy_;
  ContextBank bank_;
  std::vector<std::uint32_t> local_;
  std::vector<std::uint32_t> keys_;
  std::unique_ptr<NetSession> session_;
};

struct RnnTrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 500;  // trajectories per step
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double link_travel_min = 1.0;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
};

// Teacher-forced cross-entropy with Adam. An attentive policy builds its
// context table from `population` (defaults to ds).
TrainHistory rnn_train(SequencePolicy& policy, const demandgen::TrajectoryDataset& ds,
                       const RnnTrainConfig& cfg,
                       const demandgen::TrajectoryDataset* population = nullptr);
TrainHistory arnn_train(SequencePolicy& policy, const demandgen::TrajectoryDataset& ds,
                        const RnnTrainConfig& cfg,
                        const demandgen::TrajectoryDataset* population = nullptr);

// Mean negative log-likelihood per decision (origin, moves, End).
double policy_cross_entropy(const SequencePolicy& policy, const demandgen::TrajectoryDataset& ds);

demandgen::TrajectoryDataset sample_policy(const SequencePolicy& policy, const RolloutConfig& cfg,
                                           std::span<const double> departs = {},
                                           std::size_t workers = 1);

}  // namespace trajlab::models
