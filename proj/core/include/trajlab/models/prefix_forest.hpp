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
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/domain.hpp"

namespace trajlab::models {

// Trie of trajectory prefixes. Roots hold the Start token (one root per
// context id), deeper nodes hold locations. Nodes are numbered breadth-first
// so every depth level is a contiguous id range; within a level nodes are
// ordered by (parent, token). Each node carries the (slot, count) pairs of
// decisions taken there, which makes count-weighted losses over the forest
// equal to per-sample means over the trajectories.
class PrefixForest {
 public:
  struct Pair {
    std::uint32_t node = 0;
    std::uint32_t slot = 0;
    double count = 0.0;
    std::int32_t child = -1;  // node reached by the decision, -1 for End
  };

  // contexts / weights are per trajectory; empty spans mean 0 / 1.
  static PrefixForest build(const Domain& domain, const demandgen::TrajectoryDataset& ds,
                            std::span<const std::uint32_t> contexts = {},
                            std::span<const double> weights = {});

  std::size_t size() const noexcept { return parent_.size(); }
  std::size_t num_roots() const noexcept { return level_begin_.size() > 1 ? level_begin_[1] : size(); }
  std::size_t num_levels() const noexcept { return level_begin_.size() - 1; }
  std::size_t level_begin(std::size_t d) const { return level_begin_.at(d); }
  std::size_t level_end(std::size_t d) const { return level_begin_.at(d + 1); }

  std::int32_t parent(std::size_t i) const { return parent_[i]; }
  ObservationId token(std::size_t i) const { return token_[i]; }
  std::uint32_t depth(std::size_t i) const { return depth_[i]; }
  std::uint32_t context(std::size_t i) const { return context_[i]; }
  const std::vector<ObservationId>& tokens() const noexcept { return token_; }
  const std::vector<std::uint32_t>& contexts() const noexcept { return context_; }

  // All pairs, grouped by node in id order.
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }
  std::span<const Pair> pairs_of(std::size_t node) const;
  double total_count() const noexcept { return total_; }
  // Sum of pair counts at the node (its weighted visit count).
  double node_weight(std::size_t node) const;

  // Node sequence [root, n_1, ..., n_m] of trajectory k.
  const std::vector<std::uint32_t>& trajectory_nodes(std::size_t k) const { return paths_.at(k); }

 private:
  std::vector<std::int32_t> parent_;
  std::vector<ObservationId> token_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> context_;
  std::vector<std::size_t> level_begin_;
  std::vector<Pair> pairs_;
  std::vector<std::size_t> pair_begin_;
  std::vector<std::vector<std::uint32_t>> paths_;
  double total_ = 0.0;
};

// Number of distinct route keys (incomplete trajectories included).
std::size_t count_unique_routes(const demandgen::TrajectoryDataset& ds);

}  // namespace trajlab::models
