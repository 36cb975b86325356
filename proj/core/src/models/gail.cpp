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

#include "trajlab/models/gail.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/random.hpp"

namespace trajlab::models {

using nd::Tensor;
using nd::Var;

namespace {

constexpr std::uint64_t kRolloutStream = 0x726f6c6c;

// Per-pair tensors laid out like a SequenceNet::Output.
struct PairTensors {
  Tensor start;
  Tensor step;

  explicit PairTensors(const SequenceNet::Output& out, double fill = 0.0)
      : start(out.start.value().shape(), fill) {
    if (out.step.defined()) step = Tensor(out.step.value().shape(), fill);
  }
  double& at(const PrefixForest::Pair& p, std::size_t roots) {
    return p.node < roots ? start.at(p.node, p.slot) : step.at(p.node - roots, p.slot);
  }
};

double logit_at(const SequenceNet::Output& out, const PrefixForest::Pair& p) {
  const std::size_t R = out.num_roots;
  return p.node < R ? out.start.value().at(p.node, p.slot)
                    : out.step.value().at(p.node - R, p.slot);
}

Var weighted_pair_sum(const Var& start, const Var& step, const PairTensors& w) {
  Var s = nd::weighted_sum(start, w.start);
  if (step.defined()) s = nd::add(s, nd::weighted_sum(step, w.step));
  return s;
}

struct LogProbs {
  Var start;
  Var step;
};

LogProbs policy_log_probs(const SequenceNet::Output& out) {
  LogProbs lp;
  lp.start = nd::masked_log_softmax(out.start, nd::Mask(out.start.rows(), out.start.cols(), true));
  if (out.step.defined()) lp.step = nd::masked_log_softmax(out.step, out.step_mask);
  return lp;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw TrainingError(std::string(what) + ": non-finite loss");
}

}  // namespace

void GailConfig::validate() const {
  if (iters == 0 || samples == 0) throw ConfigError("gail: iters and samples must be positive");
  if (d_updates == 0 || g_updates == 0) throw ConfigError("gail: update counts must be positive");
  if (!(lr > 0.0)) throw ConfigError("gail: learning rate must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gail: gamma must lie in [0, 1]");
  if (!(lambda >= 0.0)) throw ConfigError("gail: lambda must be non-negative");
  if (net.attention) throw ConfigError("gail: attention is not supported");
  if (max_len == 1) throw ConfigError("gail: max_len must be >= 2");
  net.validate();
}

TrajGailBundle TrajGailBundle::create(const Domain& domain, const NetConfig& net, double gamma,
                                      double lambda, std::uint64_t seed) {
  TrajGailBundle b;
  b.policy = SequencePolicy::create(domain, net, derive_seed(seed, 1), "policy");
  b.value_net = SequenceNet(domain, net, "value");
  Rng rv(derive_seed(seed, 2));
  b.value_net.init(b.value, rv);
  b.disc_net = SequenceNet(domain, net, "disc");
  Rng rd(derive_seed(seed, 3));
  b.disc_net.init(b.disc, rd);
  b.gamma = gamma;
  b.lambda = lambda;
  return b;
}

double reward_from_probability(double d) noexcept {
  return -std::log(std::clamp(d, 1e-8, 1.0 - 1e-8));
}

double discriminator_probability(const TrajGailBundle& b, std::span<const std::int32_t> prefix,
                                 ObservationId to) {
  NetSession s(b.disc_net, b.disc);
  const std::size_t h = walk_prefix(s, prefix);
  std::optional<std::size_t> slot = s.is_root(h) ? b.domain().origin_slot(to)
                                                 : b.domain().slot_between(s.token(h), to);
  if (!slot) throw ContractError("discriminator_probability: move not admissible");
  return nd::sigmoid_scalar(s.scores(h)[*slot]);
}

double reward_from_discriminator(const TrajGailBundle& b, std::span<const std::int32_t> prefix,
                                 ObservationId to) {
  return reward_from_probability(discriminator_probability(b, prefix, to));
}

Var discriminator_loss(const TrajGailBundle& b, const PrefixForest& real, const PrefixForest& gen) {
  if (!(real.total_count() > 0.0) || !(gen.total_count() > 0.0)) {
    throw ContractError("discriminator update needs non-empty real and generated batches");
  }
  Var loss;
  for (int side = 0; side < 2; ++side) {
    const PrefixForest& f = side == 0 ? gen : real;
    const double label = side == 0 ? 1.0 : 0.0;
    const auto out = b.disc_net.forward(b.disc, f);
    PairTensors w(out), y(out, label);
    for (const auto& p : f.pairs()) w.at(p, out.num_roots) += p.count / f.total_count();
    Var l = nd::bce_with_logits(out.start, y.start, w.start);
    if (out.step.defined()) l = nd::add(l, nd::bce_with_logits(out.step, y.step, w.step));
    loss = side == 0 ? l : nd::add(loss, l);
  }
  return loss;
}

std::vector<double> pair_rewards(const TrajGailBundle& b, const PrefixForest& gen) {
  nd::NoGradGuard guard;
  const auto out = b.disc_net.forward(b.disc, gen);
  std::vector<double> r;
  r.reserve(gen.pairs().size());
  for (const auto& p : gen.pairs()) {
    r.push_back(reward_from_probability(nd::sigmoid_scalar(logit_at(out, p))));
  }
  return r;
}

std::vector<double> value_targets(const TrajGailBundle& b, const PrefixForest& gen,
                                  std::span<const double> rewards) {
  if (rewards.size() != gen.pairs().size()) throw DimensionError("one reward per pair required");
  nd::NoGradGuard guard;
  const auto q = b.value_net.forward(b.value, gen);
  const auto pol = b.policy.net.forward(b.policy.params, gen);
  const LogProbs lp = policy_log_probs(pol);
  const std::size_t R = gen.num_roots();
  std::vector<double> y(rewards.begin(), rewards.end());
  if (b.gamma == 0.0) return y;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const auto& p = gen.pairs()[k];
    if (p.child < 0) continue;
    const std::size_t row = static_cast<std::size_t>(p.child) - R;
    double v = 0.0;
    for (std::size_t a = 0; a < q.step.cols(); ++a) {
      if (!pol.step_mask(row, a)) continue;
      v += std::exp(lp.step.value().at(row, a)) * q.step.value().at(row, a);
    }
    y[k] += b.gamma * v;
  }
  return y;
}

Var value_loss(const TrajGailBundle& b, const PrefixForest& gen, std::span<const double> targets) {
  if (targets.size() != gen.pairs().size()) throw DimensionError("one target per pair required");
  const auto out = b.value_net.forward(b.value, gen);
  PairTensors w(out), y(out);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& p = gen.pairs()[k];
    w.at(p, out.num_roots) += p.count / gen.total_count();
    y.at(p, out.num_roots) = targets[k];
  }
  Var ds = nd::square(nd::sub(out.start, Var::constant(y.start)));
  Var dt;
  if (out.step.defined()) dt = nd::square(nd::sub(out.step, Var::constant(y.step)));
  return weighted_pair_sum(ds, dt, w);
}

std::vector<double> pair_q_values(const TrajGailBundle& b, const PrefixForest& gen) {
  nd::NoGradGuard guard;
  const auto out = b.value_net.forward(b.value, gen);
  std::vector<double> q;
  q.reserve(gen.pairs().size());
  for (const auto& p : gen.pairs()) q.push_back(logit_at(out, p));
  return q;
}

Var policy_loss(const TrajGailBundle& b, const PrefixForest& gen, std::span<const double> q,
                double* entropy_out) {
  if (q.size() != gen.pairs().size()) throw DimensionError("one Q value per pair required");
  const auto out = b.policy.net.forward(b.policy.params, gen);
  const LogProbs lp = policy_log_probs(out);
  PairTensors w(out);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const auto& p = gen.pairs()[k];
    w.at(p, out.num_roots) += p.count / gen.total_count() * q[k];
  }
  Var objective = weighted_pair_sum(lp.start, lp.step, w);

  const std::size_t R = out.num_roots;
  Tensor ns = Tensor::matrix(R, 1);
  Tensor nt = out.step.defined() ? Tensor::matrix(out.step.rows(), 1) : Tensor();
  for (std::size_t n = 0; n < gen.size(); ++n) {
    const double v = gen.node_weight(n) / gen.total_count();
    if (n < R) {
      ns.at(n, 0) = v;
    } else {
      nt.at(n - R, 0) = v;
    }
  }
  Var h = nd::weighted_sum(
      nd::masked_entropy(lp.start, nd::Mask(out.start.rows(), out.start.cols(), true)), ns);
  if (out.step.defined()) h = nd::add(h, nd::weighted_sum(nd::masked_entropy(lp.step, out.step_mask), nt));
  if (entropy_out) *entropy_out = h.value().item();
  return nd::affine(nd::add(objective, nd::affine(h, b.lambda)), -1.0);
}

double gail_discriminator_update(TrajGailBundle& b, const PrefixForest& real,
                                 const PrefixForest& gen, const nd::AdamConfig& adam) {
  Var loss = discriminator_loss(b, real, gen);
  require_finite(loss.value().item(), "discriminator update");
  nd::backward(loss);
  nd::adam_step_lenient(b.disc, adam);
  nd::NoGradGuard guard;
  const double post = discriminator_loss(b, real, gen).value().item();
  require_finite(post, "discriminator update");
  return post;
}

double gail_value_update(TrajGailBundle& b, const PrefixForest& gen,
                         std::span<const double> rewards, const nd::AdamConfig& adam) {
  const auto y = value_targets(b, gen, rewards);
  Var loss = value_loss(b, gen, y);
  const double v = loss.value().item();
  require_finite(v, "value update");
  nd::backward(loss);
  nd::adam_step_lenient(b.value, adam);
  return v;
}

double gail_policy_update(TrajGailBundle& b, const PrefixForest& gen, const nd::AdamConfig& adam,
                          double* entropy_out, bool center_q) {
  std::vector<double> q = pair_q_values(b, gen);
  if (center_q) {
    double m = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) m += gen.pairs()[k].count * q[k];
    m /= gen.total_count();
    for (double& v : q) v -= m;
  }
  Var loss = policy_loss(b, gen, q, entropy_out);
  const double v = loss.value().item();
  require_finite(v, "policy update");
  nd::backward(loss);
  nd::adam_step_lenient(b.policy.params, adam);
  return -v;
}

GailResult gail_train(TrajGailBundle& b, const demandgen::TrajectoryDataset& ds,
                      const GailConfig& cfg, const GailProgress& progress) {
  cfg.validate();
  if (ds.empty()) throw ContractError("gail_train: empty dataset");
  std::size_t longest = 0;
  for (const auto& t : ds) {
    if (!b.domain().accepts(t)) throw ContractError("gail_train: trajectory not admissible");
    longest = std::max(longest, t.path.size());
  }
  const std::size_t max_len = cfg.max_len ? cfg.max_len : std::max<std::size_t>(2, 2 * longest);
  const PrefixForest real = PrefixForest::build(b.domain(), ds);
  const std::size_t expert_routes = count_unique_routes(ds);

  if (cfg.bc_epochs > 0) {
    RnnTrainConfig bc;
    bc.epochs = cfg.bc_epochs;
    bc.lr = cfg.bc_lr;
    bc.seed = cfg.seed;
    rnn_train(b.policy, ds, bc);
  }
  nd::AdamConfig adam;
  adam.lr = cfg.lr;
  GailResult res;
  std::size_t collapsed = 0;
  for (std::size_t it = 0; it < cfg.iters; ++it) try {
    RolloutConfig rc;
    rc.n = cfg.samples;
    rc.max_len = max_len;
    rc.seed = derive_seed(cfg.seed, kRolloutStream, it);
    const auto gen_ds = sample_policy(b.policy, rc, {}, cfg.workers);
    const PrefixForest gen = PrefixForest::build(b.domain(), gen_ds);

    GailLogRow row;
    row.iter = it;
    row.unique_routes = count_unique_routes(gen_ds);
    std::size_t incomplete = 0;
    for (const auto& t : gen_ds) incomplete += !t.complete;
    row.incomplete_fraction = static_cast<double>(incomplete) / static_cast<double>(gen_ds.size());

    for (std::size_t k = 0; k < cfg.d_updates; ++k) {
      row.j_discrim = gail_discriminator_update(b, real, gen, adam);
    }
    const auto rewards = pair_rewards(b, gen);
    for (std::size_t k = 0; k < cfg.g_updates; ++k) {
      row.j_value = gail_value_update(b, gen, rewards, adam);
      row.j_policy = gail_policy_update(b, gen, adam, &row.entropy, cfg.center_q);
    }
    if (!std::isfinite(row.j_policy) || !std::isfinite(row.j_value) ||
        !std::isfinite(row.j_discrim)) {
      throw TrainingError("gail_train: non-finite objective at iteration " + std::to_string(it));
    }
    collapsed = row.unique_routes == 1 ? collapsed + 1 : 0;
    if (expert_routes > 1 && collapsed == cfg.collapse_window) {
      res.warnings.push_back("mode collapse: one generated route for " +
                             std::to_string(cfg.collapse_window) + " iterations (ending at " +
                             std::to_string(it) + ")");
    }
    res.log.push_back(row);
    if (progress) progress(row);
  } catch (const NumericError& e) {
    throw TrainingError("gail_train: diverged at iteration " + std::to_string(it) + " (" +
                        e.what() + ")");
  }
  return res;
}

void write_training_log(std::ostream& os, const std::vector<GailLogRow>& rows) {
  os << "iter,J_policy,J_value,J_discrim,entropy,unique_routes\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.iter << ',' << r.j_policy << ',' << r.j_value << ',' << r.j_discrim << ','
       << r.entropy << ',' << r.unique_routes << '\n';
  }
}

}  // namespace trajlab::models
