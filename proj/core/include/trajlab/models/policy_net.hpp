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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/common/random.hpp"
#include "trajlab/demandgen/traffic_state.hpp"
#include "trajlab/models/domain.hpp"
#include "trajlab/models/prefix_forest.hpp"
#include "trajlab/nd/ops.hpp"
#include "trajlab/nd/parameters.hpp"
#include "trajlab/nd/recurrent.hpp"

namespace trajlab::models {

struct NetConfig {
  nd::CellKind cell = nd::CellKind::GRU;
  std::size_t hidden = 64;
  std::size_t layers = 3;
  std::size_t embed = 0;  // 0: same as hidden
  bool attention = false;
  std::size_t attn_dim = 16;
  std::size_t ts_bins = 10;

  std::size_t embed_size() const noexcept { return embed == 0 ? hidden : embed; }
  void validate() const;
};

nlohmann::json to_json(const NetConfig& c);
NetConfig net_config_from_json(const nlohmann::json& j, NetConfig defaults = {});

// Traffic states of one batch: context c owns rows [c*N, (c+1)*N) of
// `states`, so row c of the [C x N*bins] reshape is vec(TS_c).
struct ContextBank {
  nd::Tensor states;
  std::size_t num_contexts = 0;
  std::size_t num_locations = 0;
  std::size_t bins = 0;
};

// Traffic state for each departure minute, computed from a population of
// trips (the network's full demand).
class TrafficContexts {
 public:
  TrafficContexts() = default;
  TrafficContexts(const demandgen::TrajectoryDataset& population, std::size_t num_locations,
                  double link_travel_min, std::size_t bins = 10, double bin_min = 1.0);

  // Restores a table saved from states().
  explicit TrafficContexts(std::vector<nd::Tensor> states);

  bool empty() const noexcept { return states_.empty(); }
  const std::vector<nd::Tensor>& states() const noexcept { return states_; }
  std::uint32_t key(double depart) const;
  const nd::Tensor& state(std::uint32_t key) const;

  struct Batch {
    ContextBank bank;
    std::vector<std::uint32_t> local;  // per trajectory, index into bank
  };
  Batch batch(std::span<const double> departs) const;
  Batch batch(const demandgen::TrajectoryDataset& ds) const;

 private:
  std::vector<nd::Tensor> states_;
  std::size_t num_locations_ = 0;
  std::size_t bins_ = 0;
};

// Recurrent sequence network over forest prefixes with two score heads:
// origins at Start and slots everywhere else.
class SequenceNet {
 public:
  SequenceNet() = default;
  SequenceNet(const Domain& domain, NetConfig cfg, std::string prefix);

  const NetConfig& config() const noexcept { return cfg_; }
  const Domain& domain() const noexcept { return domain_; }
  const std::string& prefix() const noexcept { return prefix_; }

  void init(nd::ParameterSet& params, Rng& rng) const;

  // Attention keys/values for a bank; built once per forward or session.
  struct AttnInputs {
    nd::Var keys;
    nd::Var values;
  };
  AttnInputs attention_inputs(const nd::ParameterSet& params, const ContextBank* bank) const;

  nd::RecurrentState initial_state(const nd::ParameterSet& params,
                                   std::span<const std::uint32_t> contexts,
                                   const ContextBank* bank) const;
  nd::RecurrentState advance(const nd::ParameterSet& params, const nd::RecurrentState& prev,
                             std::span<const std::size_t> token_rows,
                             std::span<const std::uint32_t> contexts, const AttnInputs& attn,
                             nd::Tensor* attention_weights = nullptr) const;
  nd::Var start_head(const nd::ParameterSet& params, const nd::Var& top) const;
  nd::Var step_head(const nd::ParameterSet& params, const nd::Var& top) const;

  // Slot mask for rows with the given location tokens.
  nd::Mask step_mask(std::span<const ObservationId> tokens) const;

  struct Output {
    nd::Var start;     // [roots x origins]
    nd::Var step;      // [(nodes - roots) x slots]; undefined when no such node
    nd::Mask step_mask;
    std::size_t num_roots = 0;
  };
  Output forward(const nd::ParameterSet& params, const PrefixForest& forest,
                 const ContextBank* bank = nullptr) const;

 private:
  Domain domain_;
  NetConfig cfg_;
  std::string prefix_;
  nd::RecurrentStack stack_;
};

// Count-weighted cross-entropy of the forest's decisions (mean over all
// decisions, Start and End steps included).
nd::Var forest_cross_entropy(const SequenceNet::Output& out, const PrefixForest& forest);

}  // namespace trajlab::models
