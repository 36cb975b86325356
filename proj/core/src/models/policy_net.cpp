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

#include "trajlab/models/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

using nd::Tensor;
using nd::Var;

void NetConfig::validate() const {
  if (hidden < 1 || layers < 1) throw ConfigError("network hidden size and layers must be >= 1");
  if (attention && (attn_dim < 1 || ts_bins < 1)) {
    throw ConfigError("attention dimension and traffic bins must be >= 1");
  }
}

nlohmann::json to_json(const NetConfig& c) {
  return {{"cell", nd::to_string(c.cell)}, {"hidden", c.hidden},       {"layers", c.layers},
          {"embed", c.embed_size()},       {"attention", c.attention}, {"attn_dim", c.attn_dim},
          {"ts_bins", c.ts_bins}};
}

NetConfig net_config_from_json(const nlohmann::json& j, NetConfig d) {
  if (j.contains("cell")) d.cell = nd::cell_kind_from_string(j.at("cell").get<std::string>());
  d.hidden = j.value("hidden", d.hidden);
  d.layers = j.value("layers", d.layers);
  d.embed = j.value("embed", d.embed);
  d.attention = j.value("attention", d.attention);
  d.attn_dim = j.value("attn_dim", d.attn_dim);
  d.ts_bins = j.value("ts_bins", d.ts_bins);
  d.validate();
  return d;
}

TrafficContexts::TrafficContexts(const demandgen::TrajectoryDataset& population,
                                 std::size_t num_locations, double link_travel_min,
                                 std::size_t bins, double bin_min)
    : num_locations_(num_locations), bins_(bins) {
  demandgen::AccumulationIndex index(population, num_locations, link_travel_min);
  double last = 0.0;
  for (const auto& t : population) last = std::max(last, t.depart);
  const auto keys = static_cast<std::size_t>(std::floor(last)) + 1;
  states_.reserve(keys);
  for (std::size_t k = 0; k < keys; ++k) {
    states_.push_back(index.state_at(static_cast<double>(k), bins, bin_min).accumulation);
  }
}

TrafficContexts::TrafficContexts(std::vector<Tensor> states) : states_(std::move(states)) {
  if (states_.empty()) throw ContractError("traffic context table is empty");
  num_locations_ = states_.front().rows();
  bins_ = states_.front().cols();
  for (const auto& s : states_) {
    if (s.rank() != 2 || s.rows() != num_locations_ || s.cols() != bins_) {
      throw DimensionError("traffic context tables must share one shape");
    }
  }
}

std::uint32_t TrafficContexts::key(double depart) const {
  if (states_.empty()) throw ContractError("traffic contexts are not initialised");
  if (!(depart >= 0.0)) throw ContractError("departure time before horizon start");
  const auto k = static_cast<std::size_t>(std::floor(depart));
  return static_cast<std::uint32_t>(std::min(k, states_.size() - 1));
}

const Tensor& TrafficContexts::state(std::uint32_t key) const { return states_.at(key); }

TrafficContexts::Batch TrafficContexts::batch(std::span<const double> departs) const {
  std::map<std::uint32_t, std::uint32_t> local;
  std::vector<std::uint32_t> keys;
  keys.reserve(departs.size());
  for (double d : departs) {
    const std::uint32_t k = key(d);
    keys.push_back(k);
    local.emplace(k, 0);
  }
  Batch b;
  b.bank.num_contexts = local.size();
  b.bank.num_locations = num_locations_;
  b.bank.bins = bins_;
  b.bank.states = Tensor::matrix(std::max<std::size_t>(1, local.size()) * num_locations_, bins_);
  std::uint32_t next = 0;
  for (auto& [k, id] : local) {
    id = next++;
    const Tensor& s = states_[k];
    std::copy(s.data(), s.data() + s.size(), b.bank.states.data() + id * s.size());
  }
  for (auto k : keys) b.local.push_back(local.at(k));
  return b;
}

TrafficContexts::Batch TrafficContexts::batch(const demandgen::TrajectoryDataset& ds) const {
  std::vector<double> d;
  d.reserve(ds.size());
  for (const auto& t : ds) d.push_back(t.depart);
  return batch(d);
}

SequenceNet::SequenceNet(const Domain& domain, NetConfig cfg, std::string prefix)
    : domain_(domain), cfg_(cfg), prefix_(std::move(prefix)) {
  cfg_.validate();
  nd::RecurrentCellConfig rc;
  rc.kind = cfg_.cell;
  rc.hidden_size = cfg_.hidden;
  rc.layers = cfg_.layers;
  rc.input_size = cfg_.embed_size() + (cfg_.attention ? cfg_.ts_bins : 0);
  stack_ = nd::RecurrentStack(rc, prefix_ + ".rnn");
}

void SequenceNet::init(nd::ParameterSet& params, Rng& rng) const {
  auto uniform = [&](std::size_t r, std::size_t c, double a) {
    Tensor t = Tensor::matrix(r, c);
    for (auto& v : t.values()) v = rng.uniform(-a, a);
    return t;
  };
  const double a = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
  params.add(prefix_ + ".emb", uniform(domain_.num_tokens(), cfg_.embed_size(), a));
  stack_.init(params, rng);
  params.add(prefix_ + ".out.W", uniform(cfg_.hidden, domain_.num_slots(), a));
  params.add(prefix_ + ".out.b", Tensor::matrix(1, domain_.num_slots()));
  params.add(prefix_ + ".start.W", uniform(cfg_.hidden, domain_.num_origins(), a));
  params.add(prefix_ + ".start.b", Tensor::matrix(1, domain_.num_origins()));
  if (cfg_.attention) {
    const std::size_t flat = domain_.num_locations() * cfg_.ts_bins;
    const double af = 1.0 / std::sqrt(static_cast<double>(flat));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      const std::string p = prefix_ + ".init.l" + std::to_string(l);
      params.add(p + ".W", uniform(flat, cfg_.hidden, af));
      params.add(p + ".b", Tensor::matrix(1, cfg_.hidden));
    }
    params.add(prefix_ + ".att.Wq", uniform(cfg_.hidden, cfg_.attn_dim, a));
    params.add(prefix_ + ".att.Wk",
               uniform(cfg_.ts_bins, cfg_.attn_dim, 1.0 / std::sqrt(double(cfg_.ts_bins))));
    params.add(prefix_ + ".att.v",
               uniform(cfg_.attn_dim, 1, 1.0 / std::sqrt(double(cfg_.attn_dim))));
  }
}

SequenceNet::AttnInputs SequenceNet::attention_inputs(const nd::ParameterSet& params,
                                                      const ContextBank* bank) const {
  if (!cfg_.attention) return {};
  if (!bank || bank->num_contexts == 0) {
    throw ContractError("attention network needs a traffic-state bank");
  }
  if (bank->num_locations != domain_.num_locations() || bank->bins != cfg_.ts_bins) {
    throw DimensionError("traffic-state bank does not match the network configuration");
  }
  Var values = Var::constant(bank->states);
  return {nd::matmul(values, params.get(prefix_ + ".att.Wk")), values};
}

nd::RecurrentState SequenceNet::initial_state(const nd::ParameterSet& params,
                                              std::span<const std::uint32_t> contexts,
                                              const ContextBank* bank) const {
  if (!cfg_.attention) return stack_.zero_state(contexts.size());
  const std::size_t flat = domain_.num_locations() * cfg_.ts_bins;
  Tensor x = Tensor::matrix(contexts.size(), flat);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (contexts[i] >= bank->num_contexts) throw ContractError("context id outside the bank");
    std::copy_n(bank->states.data() + contexts[i] * flat, flat, x.data() + i * flat);
  }
  Var xv = Var::constant(std::move(x));
  nd::RecurrentState s;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string p = prefix_ + ".init.l" + std::to_string(l);
    s.h.push_back(nd::tanh(nd::add_row(nd::matmul(xv, params.get(p + ".W")), params.get(p + ".b"))));
    if (cfg_.cell == nd::CellKind::LSTM) {
      s.c.push_back(Var::constant(Tensor::matrix(contexts.size(), cfg_.hidden)));
    }
  }
  return s;
}

nd::RecurrentState SequenceNet::advance(const nd::ParameterSet& params,
                                        const nd::RecurrentState& prev,
                                        std::span<const std::size_t> token_rows,
                                        std::span<const std::uint32_t> contexts,
                                        const AttnInputs& attn, Tensor* weights) const {
  Var x = nd::gather_rows(params.get(prefix_ + ".emb"), token_rows);
  if (cfg_.attention) {
    Var q = nd::matmul(nd::RecurrentStack::top(prev), params.get(prefix_ + ".att.Wq"));
    const std::vector<std::size_t> ctx(contexts.begin(), contexts.end());
    nd::AttentionResult a = nd::additive_attention(q, attn.keys, attn.values,
                                                   params.get(prefix_ + ".att.v"), ctx,
                                                   domain_.num_locations());
    if (weights) *weights = a.weights;
    x = nd::concat_cols(std::vector<Var>{x, a.context});
  }
  return stack_.step(params, x, prev);
}

Var SequenceNet::start_head(const nd::ParameterSet& params, const Var& top) const {
  return nd::add_row(nd::matmul(top, params.get(prefix_ + ".start.W")),
                     params.get(prefix_ + ".start.b"));
}

Var SequenceNet::step_head(const nd::ParameterSet& params, const Var& top) const {
  return nd::add_row(nd::matmul(top, params.get(prefix_ + ".out.W")),
                     params.get(prefix_ + ".out.b"));
}

nd::Mask SequenceNet::step_mask(std::span<const ObservationId> tokens) const {
  nd::Mask m(tokens.size(), domain_.num_slots(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t s = 0; s < domain_.num_slots(); ++s) {
      if (domain_.allowed(tokens[i], s)) m.set(i, s, true);
    }
  }
  return m;
}

SequenceNet::Output SequenceNet::forward(const nd::ParameterSet& params,
                                         const PrefixForest& forest,
                                         const ContextBank* bank) const {
  if (forest.size() == 0) throw ContractError("forward over an empty forest");
  const AttnInputs attn = attention_inputs(params, bank);
  const std::size_t R = forest.num_roots();
  std::vector<std::uint32_t> root_ctx(forest.contexts().begin(),
                                      forest.contexts().begin() + static_cast<std::ptrdiff_t>(R));
  nd::RecurrentState prev = initial_state(params, root_ctx, bank);
  std::vector<Var> tops;
  Output out;
  out.num_roots = R;
  for (std::size_t d = 0; d < forest.num_levels(); ++d) {
    const std::size_t b = forest.level_begin(d), e = forest.level_end(d);
    std::vector<std::size_t> rows(e - b);
    std::vector<std::uint32_t> ctx(e - b);
    for (std::size_t i = b; i < e; ++i) {
      rows[i - b] = domain_.token_index(forest.token(i));
      ctx[i - b] = forest.context(i);
    }
    if (d > 0) {
      const std::size_t pb = forest.level_begin(d - 1);
      std::vector<std::size_t> idx(e - b);
      for (std::size_t i = b; i < e; ++i) idx[i - b] = static_cast<std::size_t>(forest.parent(i)) - pb;
      prev = nd::RecurrentStack::gather(prev, idx);
    }
    prev = advance(params, prev, rows, ctx, attn);
    if (d == 0) {
      out.start = start_head(params, nd::RecurrentStack::top(prev));
    } else {
      tops.push_back(nd::RecurrentStack::top(prev));
    }
  }
  if (!tops.empty()) {
    out.step = step_head(params, tops.size() == 1 ? tops.front() : nd::concat_rows(tops));
    std::vector<ObservationId> toks(forest.tokens().begin() + static_cast<std::ptrdiff_t>(R),
                                    forest.tokens().end());
    out.step_mask = step_mask(toks);
  }
  return out;
}

Var forest_cross_entropy(const SequenceNet::Output& out, const PrefixForest& forest) {
  if (!(forest.total_count() > 0.0)) throw ContractError("forest has no decisions");
  const std::size_t R = out.num_roots;
  Tensor ws(out.start.value().shape(), 0.0);
  Tensor wt;
  if (out.step.defined()) wt = Tensor(out.step.value().shape(), 0.0);
  const double inv = -1.0 / forest.total_count();
  for (const auto& p : forest.pairs()) {
    if (p.node < R) {
      ws.at(p.node, p.slot) += p.count * inv;
    } else {
      wt.at(p.node - R, p.slot) += p.count * inv;
    }
  }
  const nd::Mask all(out.start.rows(), out.start.cols(), true);
  Var loss = nd::weighted_sum(nd::masked_log_softmax(out.start, all), ws);
  if (out.step.defined()) {
    loss = nd::add(loss, nd::weighted_sum(nd::masked_log_softmax(out.step, out.step_mask), wt));
  }
  return loss;
}

}  // namespace trajlab::models
