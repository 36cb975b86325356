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

#include "trajlab/demandgen/traffic_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "trajlab/common/errors.hpp"

namespace trajlab::demandgen {

AccumulationIndex::AccumulationIndex(const TrajectoryDataset& ds, std::size_t num_locations,
                                     double link_travel_min)
    : ds_(&ds), travel_(link_travel_min), hist_max_(num_locations, 0) {
  if (num_locations == 0) throw ContractError("accumulation needs at least one location");
  if (!(travel_ > 0.0)) throw ContractError("link travel time must be positive");
  order_.resize(ds.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return ds[a].depart < ds[b].depart; });

  // Sweep +1/-1 events per location; at equal times departures from the
  // half-open interval are processed before arrivals.
  std::vector<std::vector<std::pair<double, int>>> events(num_locations);
  for (const Trajectory& t : ds) {
    max_duration_ = std::max(max_duration_, static_cast<double>(t.path.size()) * travel_);
    for (std::size_t k = 0; k < t.path.size(); ++k) {
      const auto loc = static_cast<std::size_t>(t.path[k]);
      if (t.path[k] < 0 || loc >= num_locations) {
        throw ContractError("trajectory location outside the accumulation index");
      }
      events[loc].emplace_back(t.depart + static_cast<double>(k) * travel_, +1);
      events[loc].emplace_back(t.depart + static_cast<double>(k + 1) * travel_, -1);
    }
  }
  for (std::size_t l = 0; l < num_locations; ++l) {
    auto& ev = events[l];
    std::sort(ev.begin(), ev.end());
    long cur = 0, best = 0;
    for (const auto& [_, d] : ev) {
      cur += d;
      best = std::max(best, cur);
    }
    hist_max_[l] = static_cast<std::size_t>(best);
  }
}

std::vector<std::size_t> AccumulationIndex::counts_at(double t) const {
  std::vector<std::size_t> c(hist_max_.size(), 0);
  const TrajectoryDataset& ds = *ds_;
  // Only vehicles departing in (t - max_duration, t] can be on the network.
  auto lo = std::lower_bound(order_.begin(), order_.end(), t - max_duration_,
                             [&](std::size_t i, double v) { return ds[i].depart < v; });
  for (auto it = lo; it != order_.end() && ds[*it].depart <= t; ++it) {
    const Trajectory& tr = ds[*it];
    for (std::size_t k = 0; k < tr.path.size(); ++k) {
      if (tr.depart + static_cast<double>(k) * travel_ <= t &&
          t < tr.depart + static_cast<double>(k + 1) * travel_) {
        ++c[static_cast<std::size_t>(tr.path[k])];
        break;
      }
    }
  }
  return c;
}

TrafficState AccumulationIndex::state_at(double at_time, std::size_t bins, double bin_min) const {
  if (at_time < 0.0) throw ContractError("at_time lies before the horizon start");
  if (bins == 0 || !(bin_min > 0.0)) throw ContractError("bins and bin width must be positive");
  TrafficState s;
  s.bin_min = bin_min;
  s.at_time = at_time;
  s.accumulation = nd::Tensor::matrix(hist_max_.size(), bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double t = at_time - static_cast<double>(bins - b) * bin_min;
    const auto c = counts_at(t);
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (hist_max_[l] > 0) {
        s.accumulation.at(l, b) =
            static_cast<double>(c[l]) / static_cast<double>(hist_max_[l]);
      }
    }
  }
  return s;
}

TrafficState compute_accumulation(const TrajectoryDataset& ds, std::size_t num_locations,
                                  double at_time, std::size_t bins, double bin_min,
                                  double link_travel_min) {
  return AccumulationIndex(ds, num_locations, link_travel_min).state_at(at_time, bins, bin_min);
}

}  // namespace trajlab::demandgen
