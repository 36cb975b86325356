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
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/demandgen/route_choice.hpp"
#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/roadnet/network.hpp"

namespace trajlab::demandgen {

enum class PatternKind { SingleOD, OneWayMultiOD, TwoWayMultiOD };

const char* to_string(PatternKind k) noexcept;
PatternKind pattern_from_string(const std::string& s);

struct WeightedOd {
  roadnet::OdPair od;
  double weight = 1.0;
  bool major = false;
};

struct DemandPattern {
  PatternKind kind = PatternKind::SingleOD;
  std::vector<WeightedOd> pairs;
};

// SingleOD: the one pair given (default_single_od when absent).
// Multi-OD: every OD pair at background_weight; major pairs at major_weight.
// One-way majors are west-side entries x east-side exits; two-way adds
// east-side entries x west-side exits.
DemandPattern make_pattern(const roadnet::RoadNetwork& net, PatternKind kind,
                           double major_weight = 10.0, double background_weight = 1.0,
                           std::optional<roadnet::OdPair> single = std::nullopt);

struct GeneratorConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double depart_horizon_min = 60.0;
  double link_travel_min = 1.0;
  std::size_t route_slack = 0;
  std::size_t route_cap = 20;
  std::size_t workers = 1;
};

// Trajectory i depends only on (seed, i).
TrajectoryDataset generate_dataset(const roadnet::RoadNetwork& net, const DemandPattern& pattern,
                                   const RouteChoiceModel& model, const GeneratorConfig& cfg);

// Shuffled partition; |train| = round(ratio * n). Both parts keep input order.
std::pair<TrajectoryDataset, TrajectoryDataset> split_train_test(const TrajectoryDataset& ds,
                                                                 double ratio,
                                                                 std::uint64_t seed);

nlohmann::json dataset_metadata(const DemandPattern& pattern, const RouteChoiceModel& model,
                                const GeneratorConfig& cfg);

}  // namespace trajlab::demandgen
