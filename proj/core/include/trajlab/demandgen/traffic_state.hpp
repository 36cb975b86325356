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

#include <cstddef>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/nd/tensor.hpp"

namespace trajlab::demandgen {

// [N locations x bins] vehicle accumulation normalized by each location's
// historical maximum.
struct TrafficState {
  nd::Tensor accumulation;
  double bin_min = 1.0;
  double at_time = 0.0;
};

// Occupancy model: a vehicle sits on the k-th location of its path during
// [depart + k*travel, depart + (k+1)*travel).
class AccumulationIndex {
 public:
  AccumulationIndex(const TrajectoryDataset& ds, std::size_t num_locations,
                    double link_travel_min);

  std::size_t num_locations() const noexcept { return hist_max_.size(); }
  // Exact maximum simultaneous count per location over all time.
  const std::vector<std::size_t>& historical_max() const noexcept { return hist_max_; }
  // Raw counts at instant t.
  std::vector<std::size_t> counts_at(double t) const;
  // Bin b (0-based) is sampled at at_time - (bins - b) * bin_min.
  TrafficState state_at(double at_time, std::size_t bins = 10, double bin_min = 1.0) const;

 private:
  const TrajectoryDataset* ds_;
  double travel_;
  std::vector<std::size_t> order_;  // trajectories sorted by departure
  double max_duration_ = 0.0;
  std::vector<std::size_t> hist_max_;
};

TrafficState compute_accumulation(const TrajectoryDataset& ds, std::size_t num_locations,
                                  double at_time, std::size_t bins = 10, double bin_min = 1.0,
                                  double link_travel_min = 1.0);

}  // namespace trajlab::demandgen
