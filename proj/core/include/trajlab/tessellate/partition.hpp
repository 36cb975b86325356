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
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/roadnet/network.hpp"

namespace trajlab::tessellate {

using roadnet::Point;

// Voronoi cells given by their centroids; cell ids are 0..N-1.
struct CellPartition {
  double radius = 0.0;
  std::vector<Point> centroids;

  std::size_t size() const noexcept { return centroids.size(); }
  // Nearest centroid; ties go to the lower id.
  std::int32_t assign(const Point& p) const;
};

// Greedy leader clustering in input order (a point joins the nearest leader
// within R, otherwise it becomes a leader), centroids set to member means,
// then one nearest-centroid reassignment pass that drops memberless cells.
CellPartition cluster_points(std::span<const Point> points, double radius);

// [Start, c_1, ..., c_m, End] with consecutive duplicates collapsed.
std::vector<roadnet::ObservationId> to_cell_sequence(std::span<const Point> points,
                                                     const CellPartition& part);

// Points every `step` meters along a link, starting at its upstream end and
// excluding the downstream end.
std::vector<Point> sample_link(const roadnet::Link& link, double step);
// Polyline samples of a whole route (downstream end of the last link included).
std::vector<Point> sample_route(const roadnet::RoadNetwork& net,
                                const std::vector<std::int32_t>& route, double step);
// All link samples of a network at spacing R/3.
std::vector<Point> network_points(const roadnet::RoadNetwork& net, double radius);

// Link trajectory rewritten as a cell trajectory (path holds cell ids).
demandgen::Trajectory to_cell_trajectory(const roadnet::RoadNetwork& net,
                                         const demandgen::Trajectory& t,
                                         const CellPartition& part);
demandgen::TrajectoryDataset to_cell_dataset(const roadnet::RoadNetwork& net,
                                             const demandgen::TrajectoryDataset& ds,
                                             const CellPartition& part);

nlohmann::json to_json(const CellPartition& part);
CellPartition partition_from_json(const nlohmann::json& j);
void save_partition(const CellPartition& part, const std::filesystem::path& path);
CellPartition load_partition(const std::filesystem::path& path);

}  // namespace trajlab::tessellate
