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

#include "trajlab/eval/dataset_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "trajlab/common/errors.hpp"

namespace trajlab::eval {

RouteDistribution route_distribution(const demandgen::TrajectoryDataset& ds,
                                     const std::vector<std::string>& known_keys,
                                     std::size_t* unknown_count) {
  RouteDistribution d;
  for (const auto& k : known_keys) d[k] = 0.0;
  d[kUnknownRoute] = 0.0;
  std::size_t unknown = 0;
  for (const auto& t : ds) {
    const std::string k = demandgen::route_key(t);
    auto it = t.complete ? d.find(k) : d.end();
    if (it == d.end() || it->first == kUnknownRoute) {
      ++unknown;
      d[kUnknownRoute] += 1.0;
    } else {
      it->second += 1.0;
    }
  }
  if (!ds.empty()) {
    for (auto& [k, v] : d) v /= static_cast<double>(ds.size());
  }
  if (unknown_count) *unknown_count = unknown;
  return d;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("js_divergence: support mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) d += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) d += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(d, 0.0, 1.0);
}

JsdResult route_jsd(const demandgen::TrajectoryDataset& generated,
                    const demandgen::TrajectoryDataset& real) {
  if (real.empty()) throw EvalError("route_jsd: empty real dataset");
  if (generated.empty()) throw EvalError("route_jsd: empty generated dataset");
  std::vector<std::string> keys;
  {
    std::unordered_set<std::string> seen;
    for (const auto& t : real) {
      std::string k = demandgen::route_key(t);
      if (seen.insert(k).second) keys.push_back(std::move(k));
    }
  }
  JsdResult r;
  const RouteDistribution p = route_distribution(real, keys);
  const RouteDistribution q = route_distribution(generated, keys, &r.unknown);
  std::vector<double> pv, qv;
  for (const auto& [k, v] : p) {
    pv.push_back(v);
    qv.push_back(q.at(k));
  }
  r.divergence = js_divergence(pv, qv);
  r.distance = std::sqrt(r.divergence);
  return r;
}

double transition_entropy(const demandgen::TrajectoryDataset& ds) {
  if (ds.empty()) throw EvalError("transition_entropy: empty dataset");
  std::map<std::int32_t, std::map<std::int32_t, double>> counts;
  for (const auto& t : ds) {
    for (std::size_t i = 0; i + 1 < t.path.size(); ++i) counts[t.path[i]][t.path[i + 1]] += 1.0;
  }
  if (counts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [from, row] : counts) {
    double n = 0.0;
    for (const auto& [to, c] : row) n += c;
    double h = 0.0;
    for (const auto& [to, c] : row) {
      const double p = c / n;
      h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(counts.size());
}

LinearFit complexity_sensitivity(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw EvalError("complexity_sensitivity: need at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw EvalError("complexity_sensitivity: degenerate fit, all H(D) equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

double revisit_ratio(std::span<const std::int32_t> cells) {
  if (cells.empty()) return 0.0;
  const std::set<std::int32_t> uniq(cells.begin(), cells.end());
  const double m = static_cast<double>(cells.size());
  return (m - static_cast<double>(uniq.size())) / m * 100.0;
}

RegionMetrics region_metrics(const demandgen::TrajectoryDataset& cells, std::size_t num_cells) {
  RegionMetrics r;
  r.trajectories = cells.size();
  r.visits.assign(num_cells, 0.0);
  for (const auto& t : cells) {
    std::set<std::int32_t> seen;
    for (auto c : t.path) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_cells) {
        throw ContractError("region_metrics: cell id out of range");
      }
      if (seen.insert(c).second) r.visits[static_cast<std::size_t>(c)] += 1.0;
    }
    for (std::size_t i = 0; i + 1 < t.path.size(); ++i) r.flows[{t.path[i], t.path[i + 1]}] += 1.0;
    r.revisit.push_back(revisit_ratio(t.path));
  }
  if (!cells.empty()) {
    const double n = static_cast<double>(cells.size());
    for (double& v : r.visits) v /= n;
    for (auto& [k, v] : r.flows) v /= n;
    for (double d : r.revisit) r.mean_revisit += d;
    r.mean_revisit /= n;
  }
  return r;
}

}  // namespace trajlab::eval
