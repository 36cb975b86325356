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

#include "trajlab/models/prefix_forest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

namespace {

struct RawNode {
  std::int32_t parent;
  ObservationId token;
  std::uint32_t depth;
  std::uint32_t context;
  std::vector<std::pair<std::uint32_t, double>> slots;
};

std::uint64_t child_key(std::int32_t parent, ObservationId token) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(parent)) << 32) |
         static_cast<std::uint32_t>(token);
}

void add_slot(RawNode& n, std::uint32_t slot, double w) {
  for (auto& [s, c] : n.slots) {
    if (s == slot) {
      c += w;
      return;
    }
  }
  n.slots.emplace_back(slot, w);
}

}  // namespace

PrefixForest PrefixForest::build(const Domain& domain, const demandgen::TrajectoryDataset& ds,
                                 std::span<const std::uint32_t> contexts,
                                 std::span<const double> weights) {
  if (!contexts.empty() && contexts.size() != ds.size()) {
    throw ContractError("prefix forest: one context per trajectory required");
  }
  if (!weights.empty() && weights.size() != ds.size()) {
    throw ContractError("prefix forest: one weight per trajectory required");
  }
  std::vector<RawNode> raw;
  std::map<std::uint32_t, std::int32_t> roots;
  std::unordered_map<std::uint64_t, std::int32_t> children;
  std::vector<std::vector<std::int32_t>> raw_paths(ds.size());

  for (std::size_t k = 0; k < ds.size(); ++k) {
    const demandgen::Trajectory& t = ds[k];
    const std::uint32_t ctx = contexts.empty() ? 0 : contexts[k];
    const double w = weights.empty() ? 1.0 : weights[k];
    if (!(w >= 0.0)) throw ContractError("prefix forest: negative trajectory weight");
    auto [rit, fresh] = roots.try_emplace(ctx, static_cast<std::int32_t>(raw.size()));
    if (fresh) raw.push_back({-1, kStart, 0, ctx, {}});
    std::int32_t node = rit->second;
    raw_paths[k].push_back(node);
    for (std::size_t i = 0; i < t.path.size(); ++i) {
      const ObservationId loc = t.path[i];
      std::optional<std::size_t> slot =
          i == 0 ? domain.origin_slot(loc) : domain.slot_between(t.path[i - 1], loc);
      if (!slot) {
        throw ContractError("trajectory " + std::to_string(t.id) +
                            " contains a move the domain does not admit");
      }
      add_slot(raw[node], static_cast<std::uint32_t>(*slot), w);
      auto [cit, made] = children.try_emplace(child_key(node, loc),
                                              static_cast<std::int32_t>(raw.size()));
      if (made) raw.push_back({node, loc, raw[node].depth + 1, ctx, {}});
      node = cit->second;
      raw_paths[k].push_back(node);
    }
    if (t.complete && !t.path.empty()) {
      if (!domain.end_allowed(t.path.back())) {
        throw ContractError("trajectory " + std::to_string(t.id) + " ends where End is masked");
      }
      add_slot(raw[node], static_cast<std::uint32_t>(domain.end_slot()), w);
    }
  }

  // Breadth-first renumbering: roots by context, then children by (parent, token).
  std::vector<std::vector<std::int32_t>> kids(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].parent >= 0) kids[raw[i].parent].push_back(static_cast<std::int32_t>(i));
  }
  for (auto& v : kids) {
    std::sort(v.begin(), v.end(),
              [&](std::int32_t a, std::int32_t b) { return raw[a].token < raw[b].token; });
  }
  std::vector<std::int32_t> order;
  order.reserve(raw.size());
  for (const auto& [_, r] : roots) order.push_back(r);
  PrefixForest f;
  f.level_begin_.push_back(0);
  std::size_t begin = 0;
  while (begin < order.size()) {
    const std::size_t end = order.size();
    f.level_begin_.push_back(end);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::int32_t c : kids[order[i]]) order.push_back(c);
    }
    begin = end;
  }
  if (f.level_begin_.size() == 1) f.level_begin_.push_back(0);
  std::vector<std::int32_t> new_id(raw.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_id[order[i]] = static_cast<std::int32_t>(i);

  const std::size_t n = order.size();
  f.parent_.resize(n);
  f.token_.resize(n);
  f.depth_.resize(n);
  f.context_.resize(n);
  f.pair_begin_.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    RawNode& r = raw[order[i]];
    f.parent_[i] = r.parent < 0 ? -1 : new_id[r.parent];
    f.token_[i] = r.token;
    f.depth_[i] = r.depth;
    f.context_[i] = r.context;
    std::sort(r.slots.begin(), r.slots.end());
    for (const auto& [slot, c] : r.slots) {
      std::int32_t child = -1;
      const ObservationId to =
          r.token == kStart ? domain.origin_location(slot) : domain.next(r.token, slot);
      if (to != kEnd) {
        auto it = children.find(child_key(order[i], to));
        if (it == children.end()) throw ContractError("prefix forest: dangling decision");
        child = new_id[it->second];
      }
      f.pairs_.push_back({static_cast<std::uint32_t>(i), slot, c, child});
      f.total_ += c;
    }
    f.pair_begin_.push_back(f.pairs_.size());
  }
  f.paths_.resize(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) {
    for (auto v : raw_paths[k]) f.paths_[k].push_back(static_cast<std::uint32_t>(new_id[v]));
  }
  return f;
}

std::span<const PrefixForest::Pair> PrefixForest::pairs_of(std::size_t node) const {
  return std::span<const Pair>(pairs_).subspan(pair_begin_.at(node),
                                                pair_begin_.at(node + 1) - pair_begin_[node]);
}

double PrefixForest::node_weight(std::size_t node) const {
  double w = 0.0;
  for (const Pair& p : pairs_of(node)) w += p.count;
  return w;
}

std::size_t count_unique_routes(const demandgen::TrajectoryDataset& ds) {
  std::set<std::string> keys;
  for (const auto& t : ds) keys.insert(demandgen::route_key(t));
  return keys.size();
}

}  // namespace trajlab::models
