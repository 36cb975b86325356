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

#include "trajlab/models/domain.hpp"

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

const char* to_string(Granularity g) noexcept { return g == Granularity::Link ? "link" : "cell"; }

Granularity granularity_from_string(const std::string& s) {
  if (s == "link") return Granularity::Link;
  if (s == "cell") return Granularity::Cell;
  throw ConfigError("unknown granularity: " + s);
}

Domain Domain::links(const roadnet::RoadNetwork& net) {
  Domain d;
  d.gran_ = Granularity::Link;
  d.n_ = net.num_links();
  d.slots_ = roadnet::kNumActions;
  d.origins_.assign(net.entry_links().begin(), net.entry_links().end());
  d.origin_pos_.assign(d.n_, -1);
  for (std::size_t i = 0; i < d.origins_.size(); ++i) {
    d.origin_pos_[d.origins_[i]] = static_cast<std::int32_t>(i);
  }
  d.net_ = &net;
  return d;
}

Domain Domain::cells(std::size_t num_cells) {
  if (num_cells < 2) throw ContractError("cell domain needs at least two cells");
  Domain d;
  d.gran_ = Granularity::Cell;
  d.n_ = num_cells;
  d.slots_ = num_cells + 1;
  for (std::size_t i = 0; i < num_cells; ++i) {
    d.origins_.push_back(static_cast<ObservationId>(i));
    d.origin_pos_.push_back(static_cast<std::int32_t>(i));
  }
  return d;
}

std::size_t Domain::token_index(ObservationId o) const {
  if (o == kStart) return n_;
  if (o < 0 || static_cast<std::size_t>(o) >= n_) {
    throw ContractError("token outside the domain: " + std::to_string(o));
  }
  return static_cast<std::size_t>(o);
}

ObservationId Domain::origin_location(std::size_t origin_slot) const {
  if (origin_slot >= origins_.size()) throw InvalidActionError("origin slot out of range");
  return origins_[origin_slot];
}

std::optional<std::size_t> Domain::origin_slot(ObservationId loc) const {
  if (loc < 0 || static_cast<std::size_t>(loc) >= n_ || origin_pos_[loc] < 0) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(origin_pos_[loc]);
}

ObservationId Domain::next(ObservationId loc, std::size_t slot) const {
  if (loc < 0 || static_cast<std::size_t>(loc) >= n_ || slot >= slots_) return kNone;
  if (gran_ == Granularity::Link) {
    return net_->successor(loc, static_cast<roadnet::Action>(slot));
  }
  if (slot == n_) return kEnd;
  return static_cast<ObservationId>(slot) == loc ? kNone : static_cast<ObservationId>(slot);
}

std::optional<std::size_t> Domain::slot_between(ObservationId loc, ObservationId to) const {
  if (loc < 0 || static_cast<std::size_t>(loc) >= n_) return std::nullopt;
  if (gran_ == Granularity::Cell) {
    if (to == kEnd) return n_;
    if (to < 0 || static_cast<std::size_t>(to) >= n_ || to == loc) return std::nullopt;
    return static_cast<std::size_t>(to);
  }
  const auto a = net_->action_between(loc, to);
  if (!a) return std::nullopt;
  return static_cast<std::size_t>(*a);
}

bool Domain::accepts(const demandgen::Trajectory& t) const {
  if (t.path.empty()) return !t.complete;
  if (!origin_slot(t.path.front())) return false;
  for (std::size_t i = 0; i + 1 < t.path.size(); ++i) {
    if (!slot_between(t.path[i], t.path[i + 1])) return false;
  }
  return !t.complete || end_allowed(t.path.back());
}

}  // namespace trajlab::models
