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
#include <optional>
#include <string>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/roadnet/network.hpp"

namespace trajlab::models {

using roadnet::kEnd;
using roadnet::kNone;
using roadnet::kStart;
using roadnet::ObservationId;

enum class Granularity { Link, Cell };

const char* to_string(Granularity g) noexcept;
Granularity granularity_from_string(const std::string& s);

// Decision structure shared by every model. Link domain: 4 action slots
// (Straight, Left, Right, Terminate) and an origin head over entry links.
// Cell domain: slots 0..N-1 move to that cell (self-moves masked), slot N
// ends the trip; the origin head covers all cells.
class Domain {
 public:
  static Domain links(const roadnet::RoadNetwork& net);
  static Domain cells(std::size_t num_cells);

  Granularity granularity() const noexcept { return gran_; }
  std::size_t num_locations() const noexcept { return n_; }
  std::size_t num_slots() const noexcept { return slots_; }
  std::size_t num_origins() const noexcept { return origins_.size(); }
  std::size_t end_slot() const noexcept { return slots_ - 1; }
  // Embedding rows: locations then the Start token.
  std::size_t num_tokens() const noexcept { return n_ + 1; }
  std::size_t token_index(ObservationId o) const;

  ObservationId origin_location(std::size_t origin_slot) const;
  std::optional<std::size_t> origin_slot(ObservationId loc) const;

  // Location, kEnd, or kNone when the slot is masked.
  ObservationId next(ObservationId loc, std::size_t slot) const;
  bool allowed(ObservationId loc, std::size_t slot) const { return next(loc, slot) != kNone; }
  std::optional<std::size_t> slot_between(ObservationId loc, ObservationId to) const;
  bool end_allowed(ObservationId loc) const { return allowed(loc, end_slot()); }

  // Every step of the trajectory is an admissible move in this domain.
  bool accepts(const demandgen::Trajectory& t) const;

  const roadnet::RoadNetwork* network() const noexcept { return net_; }

 private:
  Granularity gran_ = Granularity::Link;
  std::size_t n_ = 0;
  std::size_t slots_ = 0;
  std::vector<ObservationId> origins_;
  std::vector<std::int32_t> origin_pos_;
  const roadnet::RoadNetwork* net_ = nullptr;
};

}  // namespace trajlab::models
