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

#include "trajlab/models/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/random.hpp"

namespace trajlab::models {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kShuffleStream = 0x73687566;

struct Loss {
  double value = 0.0;
  double decisions = 0.0;
};

// Forest over a subset; contexts resolved through the policy's table.
Loss batch_loss(const SequencePolicy& policy, const demandgen::TrajectoryDataset& batch,
                bool train) {
  ContextBank bank;
  std::vector<std::uint32_t> ctx;
  if (policy.attentive()) {
    auto b = policy.contexts.batch(batch);
    bank = std::move(b.bank);
    ctx = std::move(b.local);
  }
  const PrefixForest forest = PrefixForest::build(policy.domain(), batch, ctx);
  const auto out = policy.net.forward(policy.params, forest, policy.attentive() ? &bank : nullptr);
  nd::Var loss = forest_cross_entropy(out, forest);
  if (train) nd::backward(loss);
  return {loss.value().item(), forest.total_count()};
}

}  // namespace

SequencePolicy SequencePolicy::create(const Domain& domain, const NetConfig& cfg,
                                      std::uint64_t seed, const std::string& prefix) {
  SequencePolicy p;
  p.net = SequenceNet(domain, cfg, prefix);
  Rng rng(derive_seed(seed, kInitStream));
  p.net.init(p.params, rng);
  return p;
}

PolicySampler::PolicySampler(const SequencePolicy& policy, std::span<const double> departs,
                             std::size_t workers)
    : policy_(policy) {
  if (policy.attentive()) {
    if (policy.contexts.empty()) throw ContractError("attentive policy has no traffic contexts");
    // Bank over every context key so later lookups need no rebuild.
    const std::size_t K = policy.contexts.states().size();
    std::vector<double> all(K);
    for (std::size_t k = 0; k < K; ++k) all[k] = static_cast<double>(k);
    auto b = policy.contexts.batch(all);
    bank_ = std::move(b.bank);
    keys_ = std::move(b.local);
    for (double d : departs) local_.push_back(keys_.at(policy.contexts.key(d)));
  } else {
    local_.assign(departs.size(), 0);
  }
  session_ = std::make_unique<NetSession>(policy.net, policy.params,
                                          policy.attentive() ? &bank_ : nullptr, workers);
}

std::uint32_t PolicySampler::context_for(double depart) const {
  if (!policy_.attentive()) return 0;
  return keys_.at(policy_.contexts.key(depart));
}

TrainHistory rnn_train(SequencePolicy& policy, const demandgen::TrajectoryDataset& ds,
                       const RnnTrainConfig& cfg, const demandgen::TrajectoryDataset* population) {
  if (ds.empty()) throw ContractError("rnn_train: empty dataset");
  if (cfg.batch_size == 0 || cfg.epochs == 0) throw ConfigError("rnn_train: epochs and batch size must be positive");
  if (!(cfg.lr > 0.0)) throw ConfigError("rnn_train: learning rate must be positive");
  for (const auto& t : ds) {
    if (!policy.domain().accepts(t)) throw ContractError("rnn_train: trajectory not admissible");
  }
  if (policy.attentive()) {
    const auto& pop = population ? *population : ds;
    policy.contexts = TrafficContexts(pop, policy.domain().num_locations(), cfg.link_travel_min,
                                      policy.net.config().ts_bins);
  }
  nd::AdamConfig adam;
  adam.lr = cfg.lr;
  TrainHistory hist;
  std::vector<std::size_t> order(ds.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0, weight = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      demandgen::TrajectoryDataset batch;
      for (std::size_t k = b; k < std::min(order.size(), b + cfg.batch_size); ++k) {
        batch.push_back(ds[order[k]]);
      }
      Loss l;
      try {
        l = batch_loss(policy, batch, true);
      } catch (const NumericError& e) {
        throw TrainingError("rnn_train: diverged at epoch " + std::to_string(epoch) + " (" +
                            e.what() + ")");
      }
      if (!std::isfinite(l.value)) {
        throw TrainingError("rnn_train: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(b / cfg.batch_size));
      }
      nd::adam_step_lenient(policy.params, adam);
      total += l.value * l.decisions;
      weight += l.decisions;
    }
    hist.epoch_loss.push_back(total / weight);
  }
  return hist;
}

TrainHistory arnn_train(SequencePolicy& policy, const demandgen::TrajectoryDataset& ds,
                        const RnnTrainConfig& cfg, const demandgen::TrajectoryDataset* population) {
  if (!policy.attentive()) throw ContractError("arnn_train: policy has no attention");
  return rnn_train(policy, ds, cfg, population);
}

double policy_cross_entropy(const SequencePolicy& policy, const demandgen::TrajectoryDataset& ds) {
  if (ds.empty()) throw ContractError("policy_cross_entropy: empty dataset");
  nd::NoGradGuard guard;
  return batch_loss(policy, ds, false).value;
}

demandgen::TrajectoryDataset sample_policy(const SequencePolicy& policy, const RolloutConfig& cfg,
                                           std::span<const double> departs, std::size_t workers) {
  PolicySampler sampler(policy, departs, workers);
  return rollout_sample(sampler.session(), cfg,
                        departs.empty() ? std::span<const std::uint32_t>{}
                                        : std::span<const std::uint32_t>(sampler.contexts()),
                        departs);
}

}  // namespace trajlab::models
