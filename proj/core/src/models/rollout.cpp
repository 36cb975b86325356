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

#include "trajlab/models/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/parallel.hpp"
#include "trajlab/common/random.hpp"

namespace trajlab::models {

using nd::Tensor;
using nd::Var;

namespace {

std::uint64_t child_key(std::size_t h, ObservationId t) {
  return (static_cast<std::uint64_t>(h) << 32) ^ static_cast<std::uint32_t>(t);
}

}  // namespace

std::vector<std::size_t> PrefixModel::roots(std::span<const std::uint32_t> contexts) {
  std::vector<std::size_t> out;
  const std::size_t first = num_nodes();
  for (std::uint32_t c : contexts) {
    auto [it, fresh] = root_of_.try_emplace(c, num_nodes());
    if (fresh) {
      token_.push_back(kStart);
      depth_.push_back(0);
      context_.push_back(c);
      parent_.push_back(-1);
      dist_.emplace_back();
    }
    out.push_back(it->second);
  }
  if (num_nodes() > first) compute(first);
  return out;
}

std::vector<std::size_t> PrefixModel::children(
    std::span<const std::pair<std::size_t, ObservationId>> req) {
  std::vector<std::size_t> out;
  const std::size_t first = num_nodes();
  for (const auto& [h, t] : req) {
    if (h >= num_nodes()) throw ContractError("unknown prefix handle");
    if (t < 0 || static_cast<std::size_t>(t) >= domain().num_locations()) {
      throw ContractError("child token must be a location");
    }
    auto [it, fresh] = child_of_.try_emplace(child_key(h, t), num_nodes());
    if (fresh) {
      token_.push_back(t);
      depth_.push_back(depth_[h] + 1);
      context_.push_back(context_[h]);
      parent_.push_back(static_cast<std::int64_t>(h));
      dist_.emplace_back();
    }
    out.push_back(it->second);
  }
  if (num_nodes() > first) compute(first);
  return out;
}

std::size_t PrefixModel::root(std::uint32_t context) {
  const std::uint32_t c[1] = {context};
  return roots(c).front();
}

std::size_t PrefixModel::child(std::size_t handle, ObservationId token) {
  const std::pair<std::size_t, ObservationId> r[1] = {{handle, token}};
  return children(r).front();
}

std::span<const double> PrefixModel::distribution(std::size_t h) const { return dist_.at(h); }

double PrefixModel::transition_probability(std::size_t h, ObservationId to) const {
  const auto d = distribution(h);
  if (is_root(h)) {
    const auto s = domain().origin_slot(to);
    return s ? d[*s] : 0.0;
  }
  const auto s = domain().slot_between(token(h), to);
  return s ? d[*s] : 0.0;
}

NetSession::NetSession(const SequenceNet& net, const nd::ParameterSet& params,
                       const ContextBank* bank, std::size_t workers)
    : net_(net), params_(params), bank_(bank), workers_(std::max<std::size_t>(1, workers)) {
  nd::NoGradGuard guard;
  attn_ = net_.attention_inputs(params_, bank_);
  h_.resize(net_.config().layers);
  if (net_.config().cell == nd::CellKind::LSTM) c_.resize(net_.config().layers);
}

void NetSession::compute(std::size_t first) {
  const std::size_t n = num_nodes();
  const std::size_t H = net_.config().hidden;
  const std::size_t L = net_.config().layers;
  for (auto& v : h_) v.resize(n * H);
  for (auto& v : c_) v.resize(n * H);
  scores_.resize(n);
  auto& dist = distributions();

  std::vector<std::size_t> roots_new, inner_new;
  for (std::size_t i = first; i < n; ++i) (is_root(i) ? roots_new : inner_new).push_back(i);

  auto run = [&](const std::vector<std::size_t>& nodes, bool roots_batch) {
    if (nodes.empty()) return;
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (nodes.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, workers_, [&](std::size_t ci) {
      nd::NoGradGuard guard;
      const std::size_t b = ci * kChunk, e = std::min(nodes.size(), b + kChunk);
      const std::size_t m = e - b;
      std::vector<std::size_t> rows(m);
      std::vector<std::uint32_t> ctx(m);
      std::vector<ObservationId> toks(m);
      for (std::size_t k = 0; k < m; ++k) {
        rows[k] = net_.domain().token_index(token(nodes[b + k]));
        ctx[k] = context(nodes[b + k]);
        toks[k] = token(nodes[b + k]);
      }
      nd::RecurrentState prev;
      if (roots_batch) {
        prev = net_.initial_state(params_, ctx, bank_);
      } else {
        for (std::size_t l = 0; l < L; ++l) {
          Tensor th = Tensor::matrix(m, H);
          Tensor tc = c_.empty() ? Tensor() : Tensor::matrix(m, H);
          for (std::size_t k = 0; k < m; ++k) {
            const auto p = static_cast<std::size_t>(parent(nodes[b + k]));
            std::copy_n(h_[l].data() + p * H, H, th.data() + k * H);
            if (!c_.empty()) std::copy_n(c_[l].data() + p * H, H, tc.data() + k * H);
          }
          prev.h.push_back(Var::constant(std::move(th)));
          if (!c_.empty()) prev.c.push_back(Var::constant(std::move(tc)));
        }
      }
      nd::RecurrentState next = net_.advance(params_, prev, rows, ctx, attn_);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t k = 0; k < m; ++k) {
          const std::size_t node = nodes[b + k];
          std::copy_n(next.h[l].value().data() + k * H, H, h_[l].data() + node * H);
          if (!c_.empty()) std::copy_n(next.c[l].value().data() + k * H, H, c_[l].data() + node * H);
        }
      }
      const Var& top = nd::RecurrentStack::top(next);
      const Var sc = roots_batch ? net_.start_head(params_, top) : net_.step_head(params_, top);
      const std::size_t S = sc.cols();
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t node = nodes[b + k];
        std::vector<double> s(sc.value().data() + k * S, sc.value().data() + (k + 1) * S);
        std::vector<double> p(S, 0.0);
        double mx = -INFINITY;
        for (std::size_t j = 0; j < S; ++j) {
          if (roots_batch || net_.domain().allowed(toks[k], j)) mx = std::max(mx, s[j]);
        }
        if (!std::isfinite(mx)) throw SamplingError("network produced a zero-mass distribution");
        double z = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
          if (roots_batch || net_.domain().allowed(toks[k], j)) z += p[j] = std::exp(s[j] - mx);
        }
        for (double& v : p) v /= z;
        scores_[node] = std::move(s);
        dist[node] = std::move(p);
      }
    });
  };
  run(roots_new, true);
  run(inner_new, false);
}

namespace {

struct Walker {
  std::size_t handle;
  demandgen::Trajectory traj;
  Rng rng;
  bool active = true;
};

void drive(PrefixModel& model, std::vector<Walker>& walkers, std::size_t max_len,
           std::size_t base_len) {
  const Domain& dom = model.domain();
  while (true) {
    std::vector<std::pair<std::size_t, ObservationId>> req;
    std::vector<std::size_t> who;
    for (std::size_t i = 0; i < walkers.size(); ++i) {
      Walker& w = walkers[i];
      if (!w.active) continue;
      const auto dist = model.distribution(w.handle);
      const std::size_t slot = w.rng.categorical(dist);
      ObservationId to;
      if (model.is_root(w.handle)) {
        to = dom.origin_location(slot);
      } else {
        to = dom.next(model.token(w.handle), slot);
        if (to == kNone) throw SamplingError("sampled a masked action");
      }
      if (to == kEnd) {
        w.active = false;
        w.traj.complete = true;
        continue;
      }
      if (base_len + w.traj.path.size() >= max_len) {
        w.active = false;
        w.traj.complete = false;
        continue;
      }
      w.traj.path.push_back(to);
      req.emplace_back(w.handle, to);
      who.push_back(i);
    }
    if (req.empty()) break;
    const auto next = model.children(req);
    for (std::size_t k = 0; k < who.size(); ++k) walkers[who[k]].handle = next[k];
  }
}

}  // namespace

demandgen::TrajectoryDataset rollout_sample(PrefixModel& model, const RolloutConfig& cfg,
                                            std::span<const std::uint32_t> contexts,
                                            std::span<const double> departs) {
  if (cfg.max_len < 2) throw ContractError("rollout_sample: max_len must be >= 2");
  if (!contexts.empty() && contexts.size() != cfg.n) {
    throw ContractError("rollout_sample: one context per trajectory required");
  }
  if (!departs.empty() && departs.size() != cfg.n) {
    throw ContractError("rollout_sample: one departure per trajectory required");
  }
  std::vector<std::uint32_t> ctx(contexts.begin(), contexts.end());
  if (ctx.empty()) ctx.assign(cfg.n, 0);
  const auto roots = model.roots(ctx);
  std::vector<Walker> walkers;
  walkers.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    demandgen::Trajectory t;
    t.id = static_cast<std::int64_t>(i);
    t.depart = departs.empty() ? 0.0 : departs[i];
    walkers.push_back({roots[i], std::move(t), Rng(derive_seed(cfg.seed, i)), true});
  }
  drive(model, walkers, cfg.max_len, 0);
  demandgen::TrajectoryDataset out;
  out.reserve(cfg.n);
  for (auto& w : walkers) out.push_back(std::move(w.traj));
  return out;
}

std::size_t walk_prefix(PrefixModel& model, std::span<const std::int32_t> prefix,
                        std::uint32_t context) {
  std::size_t h = model.root(context);
  for (auto loc : prefix) {
    const bool ok = model.is_root(h) ? model.domain().origin_slot(loc).has_value()
                                     : model.domain().slot_between(model.token(h), loc).has_value();
    if (!ok) throw ContractError("prefix contains a move the domain does not admit");
    h = model.child(h, loc);
  }
  return h;
}

std::vector<demandgen::Trajectory> sample_continuations(PrefixModel& model,
                                                        std::span<const std::int32_t> prefix,
                                                        std::uint32_t context, std::size_t count,
                                                        std::size_t max_len, std::uint64_t seed) {
  const std::size_t start = walk_prefix(model, prefix, context);
  std::vector<Walker> walkers;
  walkers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    walkers.push_back({start, demandgen::Trajectory{static_cast<std::int64_t>(i), {}, 0.0, true},
                       Rng(derive_seed(seed, i)), true});
  }
  drive(model, walkers, max_len, prefix.size());
  std::vector<demandgen::Trajectory> out;
  for (auto& w : walkers) out.push_back(std::move(w.traj));
  return out;
}

}  // namespace trajlab::models
