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
#include <unordered_map>
#include <utility>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/domain.hpp"
#include "trajlab/models/policy_net.hpp"

namespace trajlab::models {

// Any model that maps an observation prefix to a next-step distribution.
// Prefixes are interned as handles; a root handle stands for [Start] under a
// context id and its distribution ranges over origin slots, every other
// handle's over domain slots (masked slots have probability exactly 0).
class PrefixModel {
 public:
  virtual ~PrefixModel() = default;
  PrefixModel() = default;
  PrefixModel(const PrefixModel&) = delete;
  PrefixModel& operator=(const PrefixModel&) = delete;

  virtual const Domain& domain() const = 0;

  std::vector<std::size_t> roots(std::span<const std::uint32_t> contexts);
  std::vector<std::size_t> children(std::span<const std::pair<std::size_t, ObservationId>> req);
  std::size_t root(std::uint32_t context);
  std::size_t child(std::size_t handle, ObservationId token);

  std::size_t num_nodes() const noexcept { return token_.size(); }
  ObservationId token(std::size_t h) const { return token_.at(h); }
  std::uint32_t depth(std::size_t h) const { return depth_.at(h); }
  std::uint32_t context(std::size_t h) const { return context_.at(h); }
  std::int64_t parent(std::size_t h) const { return parent_.at(h); }
  bool is_root(std::size_t h) const { return parent_.at(h) < 0; }
  std::span<const double> distribution(std::size_t h) const;

  // Probability the model gives to moving from handle h to `to` (a location
  // or kEnd); 0 when the move is not admissible.
  double transition_probability(std::size_t h, ObservationId to) const;

 protected:
  // Fill distributions of every node in [first, num_nodes()).
  virtual void compute(std::size_t first) = 0;
  std::vector<std::vector<double>>& distributions() { return dist_; }

 private:
  std::vector<ObservationId> token_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> context_;
  std::vector<std::int64_t> parent_;
  std::vector<std::vector<double>> dist_;
  std::unordered_map<std::uint32_t, std::size_t> root_of_;
  std::unordered_map<std::uint64_t, std::size_t> child_of_;
};

// Inference session over a SequenceNet with a fixed parameter snapshot.
// Rows are evaluated in chunks on `workers` threads; each row's numbers do
// not depend on how rows are batched.
class NetSession : public PrefixModel {
 public:
  NetSession(const SequenceNet& net, const nd::ParameterSet& params,
             const ContextBank* bank = nullptr, std::size_t workers = 1);
  const Domain& domain() const override { return net_.domain(); }
  // Raw head scores of a node.
  std::span<const double> scores(std::size_t h) const { return scores_.at(h); }

 protected:
  void compute(std::size_t first) override;

 private:
  const SequenceNet& net_;
  const nd::ParameterSet& params_;
  const ContextBank* bank_;
  std::size_t workers_;
  SequenceNet::AttnInputs attn_;
  std::vector<std::vector<double>> h_;  // per layer, nodes x hidden
  std::vector<std::vector<double>> c_;
  std::vector<std::vector<double>> scores_;
};

struct RolloutConfig {
  std::size_t n = 1000;
  std::size_t max_len = 50;  // locations per trajectory
  std::uint64_t seed = 0;
};

// n trajectories sampled step by step. Trajectory i draws only from stream
// (seed, i). A trajectory still running after max_len locations is cut and
// marked incomplete. contexts/departs are per trajectory (optional).
demandgen::TrajectoryDataset rollout_sample(PrefixModel& model, const RolloutConfig& cfg,
                                            std::span<const std::uint32_t> contexts = {},
                                            std::span<const double> departs = {});

// Handle of the prefix [Start, prefix...] under `context`.
std::size_t walk_prefix(PrefixModel& model, std::span<const std::int32_t> prefix,
                        std::uint32_t context = 0);

// `count` continuations of a given prefix; returned paths exclude the prefix.
std::vector<demandgen::Trajectory> sample_continuations(PrefixModel& model,
                                                        std::span<const std::int32_t> prefix,
                                                        std::uint32_t context, std::size_t count,
                                                        std::size_t max_len, std::uint64_t seed);

}  // namespace trajlab::models
