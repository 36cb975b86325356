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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/roadnet/network.hpp"

namespace trajlab::demandgen {

using roadnet::ObservationId;

// Location sequence without the virtual Start/End tokens. Locations are link
// ids or cell ids depending on the dataset. Incomplete trajectories were cut
// at a length limit and never reached End.
struct Trajectory {
  std::int64_t id = 0;
  std::vector<std::int32_t> path;
  double depart = 0.0;
  bool complete = true;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using TrajectoryDataset = std::vector<Trajectory>;

// Canonical route key "a-b-c"; incomplete trajectories get a trailing "-?".
std::string route_key(const Trajectory& t);
std::string route_key(const std::vector<std::int32_t>& path);

// [Start, path..., End]; End is omitted for incomplete trajectories.
std::vector<ObservationId> with_virtual_tokens(const Trajectory& t);

// Complete trajectories must be valid entry-to-exit routes; incomplete ones
// must be valid prefixes starting at an entry link.
bool is_valid_trajectory(const roadnet::RoadNetwork& net, const Trajectory& t);

nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_jsonl(const TrajectoryDataset& ds, const std::filesystem::path& path);
TrajectoryDataset read_jsonl(const std::filesystem::path& path);
void write_csv(const TrajectoryDataset& ds, const std::filesystem::path& path);

// Plain integer lists, one per line (cell-sequence export).
void write_sequences_jsonl(const std::vector<std::vector<std::int32_t>>& seqs,
                           const std::filesystem::path& path);

}  // namespace trajlab::demandgen
