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

#include <filesystem>

#include <nlohmann/json.hpp>

#include "trajlab/roadnet/network.hpp"

namespace trajlab::roadnet {

nlohmann::json to_json(const RoadNetwork& net);
// Validates all invariants; throws IoError on malformed or inconsistent input.
RoadNetwork network_from_json(const nlohmann::json& j);

void save_network(const RoadNetwork& net, const std::filesystem::path& path);
RoadNetwork load_network(const std::filesystem::path& path);

}  // namespace trajlab::roadnet
