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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"

namespace trajlab::eval {

inline constexpr const char* kUnknownRoute = "UNKNOWN";

// Route key -> probability. Keys absent from the reference set are pooled
// under kUnknownRoute.
using RouteDistribution = std::map<std::string, double>;

RouteDistribution route_distribution(const demandgen::TrajectoryDataset& ds,
                                     const std::vector<std::string>& known_keys,
                                     std::size_t* unknown_count = nullptr);

struct JsdResult {
  double distance = 0.0;    // sqrt of the base-2 divergence
  double divergence = 0.0;
  std::size_t unknown = 0;  // generated trajectories outside the real route set
};

// Incomplete generated trajectories are always unknown.
JsdResult route_jsd(const demandgen::TrajectoryDataset& generated,
                    const demandgen::TrajectoryDataset& real);
// Base-2 Jensen-Shannon divergence of two distributions on the same support.
double js_divergence(std::span<const double> p, std::span<const double> q);

// Mean over links with an outgoing observed transition of the natural-log
// entropy of the next-link distribution.
double transition_entropy(const demandgen::TrajectoryDataset& ds);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
// OLS of y on x; all-equal x throws EvalError.
LinearFit complexity_sensitivity(std::span<const std::pair<double, double>> points);

struct RegionMetrics {
  std::size_t trajectories = 0;
  std::vector<double> visits;                             // unique visitors per cell / n
  std::map<std::pair<std::int32_t, std::int32_t>, double> flows;  // transitions per pair / n
  std::vector<double> revisit;                            // D per trajectory, percent
  double mean_revisit = 0.0;
};

// Over cell sequences (paths hold cell ids).
RegionMetrics region_metrics(const demandgen::TrajectoryDataset& cells, std::size_t num_cells);
double revisit_ratio(std::span<const std::int32_t> cells);

}  // namespace trajlab::eval
