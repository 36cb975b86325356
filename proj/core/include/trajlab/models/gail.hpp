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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/prefix_forest.hpp"
#include "trajlab/models/rnn.hpp"

namespace trajlab::models {

struct GailConfig {
  std::size_t iters = 20000;
  std::size_t samples = 20000;
  std::size_t d_updates = 2;
  std::size_t g_updates = 6;
  NetConfig net;  // 64 hidden, 3 layers
  double lr = 5e-5;
  double gamma = 0.95;
  double lambda = 0.01;
  std::size_t max_len = 0;  // 0: twice the longest expert trajectory
  bool center_q = false;    // subtract the weighted mean of Q in the policy step
  std::size_t bc_epochs = 0;
  double bc_lr = 1e-3;
  std::size_t collapse_window = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

// Policy, value estimator and discriminator, each with its own recurrent
// embedding. Value and discriminator heads score every slot: Q(s, a) and the
// logit of D(s, a) = P(pair was generated).
struct TrajGailBundle {
  SequencePolicy policy;
  SequenceNet value_net;
  nd::ParameterSet value;
  SequenceNet disc_net;
  nd::ParameterSet disc;
  double gamma = 0.95;
  double lambda = 0.01;

  static TrajGailBundle create(const Domain& domain, const NetConfig& net, double gamma,
                               double lambda, std::uint64_t seed);
  const Domain& domain() const noexcept { return policy.domain(); }
};

// -log D with D clamped to [1e-8, 1 - 1e-8].
double reward_from_probability(double d) noexcept;
// D(s, a) for the move prefix -> to (a location or kEnd; an empty prefix
// scores the origin choice).
double discriminator_probability(const TrajGailBundle& b, std::span<const std::int32_t> prefix,
                                 ObservationId to);
double reward_from_discriminator(const TrajGailBundle& b, std::span<const std::int32_t> prefix,
                                 ObservationId to);

// Objectives over forests. Pair order follows forest.pairs().
nd::Var discriminator_loss(const TrajGailBundle& b, const PrefixForest& real,
                           const PrefixForest& gen);
std::vector<double> pair_rewards(const TrajGailBundle& b, const PrefixForest& gen);
// Bootstrap targets R + gamma * sum_a' pi(a'|child) Q(child, a'), or R at End.
std::vector<double> value_targets(const TrajGailBundle& b, const PrefixForest& gen,
                                  std::span<const double> rewards);
nd::Var value_loss(const TrajGailBundle& b, const PrefixForest& gen,
                   std::span<const double> targets);
std::vector<double> pair_q_values(const TrajGailBundle& b, const PrefixForest& gen);
// Negated ascent objective: -(E[log pi * Q] + lambda * H).
nd::Var policy_loss(const TrajGailBundle& b, const PrefixForest& gen, std::span<const double> q,
                    double* entropy_out = nullptr);

// Single optimizer steps. The discriminator update returns its post-step
// loss, the value update the loss it stepped on and the policy update the
// ascent objective E[log pi * Q] + lambda * H before its step.
double gail_discriminator_update(TrajGailBundle& b, const PrefixForest& real,
                                 const PrefixForest& gen, const nd::AdamConfig& adam);
double gail_value_update(TrajGailBundle& b, const PrefixForest& gen,
                         std::span<const double> rewards, const nd::AdamConfig& adam);
double gail_policy_update(TrajGailBundle& b, const PrefixForest& gen, const nd::AdamConfig& adam,
                          double* entropy_out = nullptr, bool center_q = false);

struct GailLogRow {
  std::size_t iter = 0;
  double j_policy = 0.0;
  double j_value = 0.0;
  double j_discrim = 0.0;
  double entropy = 0.0;
  std::size_t unique_routes = 0;
  double incomplete_fraction = 0.0;
};

struct GailResult {
  std::vector<GailLogRow> log;
  std::vector<std::string> warnings;
};

using GailProgress = std::function<void(const GailLogRow&)>;

GailResult gail_train(TrajGailBundle& b, const demandgen::TrajectoryDataset& ds,
                      const GailConfig& cfg, const GailProgress& progress = {});

void write_training_log(std::ostream& os, const std::vector<GailLogRow>& rows);

}  // namespace trajlab::models
