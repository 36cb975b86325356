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

#include "trajlab/demandgen/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/parallel.hpp"
#include "trajlab/common/random.hpp"

namespace trajlab::demandgen {

using roadnet::Heading;
using roadnet::LinkId;
using roadnet::OdPair;

namespace {
// Stream tags keep the generator, splitter, etc. on disjoint RNG streams.
constexpr std::uint64_t kSplitStream = 0x5350'4c49'5400ULL;
}  // namespace

const char* to_string(PatternKind k) noexcept {
  switch (k) {
    case PatternKind::SingleOD: return "SingleOD";
    case PatternKind::OneWayMultiOD: return "OneWayMultiOD";
    case PatternKind::TwoWayMultiOD: return "TwoWayMultiOD";
  }
  return "?";
}

PatternKind pattern_from_string(const std::string& s) {
  for (auto k : {PatternKind::SingleOD, PatternKind::OneWayMultiOD, PatternKind::TwoWayMultiOD}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown demand pattern: " + s);
}

DemandPattern make_pattern(const roadnet::RoadNetwork& net, PatternKind kind,
                           double major_weight, double background_weight,
                           std::optional<OdPair> single) {
  if (!(major_weight >= 0.0) || !(background_weight >= 0.0)) {
    throw ConfigError("demand weights must be non-negative");
  }
  DemandPattern p;
  p.kind = kind;
  if (kind == PatternKind::SingleOD) {
    const OdPair od = single ? *single : roadnet::default_single_od(net);
    if (!net.is_entry(od.origin) || !net.is_exit(od.dest)) {
      throw ContractError("single-OD pair references links that are not entry/exit stubs");
    }
    if (net.same_intersection(od.origin, od.dest)) {
      throw ContractError("single-OD pair is a same-intersection U-turn");
    }
    p.pairs.push_back({od, 1.0, true});
    return p;
  }
  auto heading = [&](LinkId l) { return net.link(l).heading; };
  for (const OdPair& od : net.od_pairs()) {
    const Heading he = heading(od.origin), hx = heading(od.dest);
    bool major = he == Heading::East && hx == Heading::East;
    if (kind == PatternKind::TwoWayMultiOD) {
      major = major || (he == Heading::West && hx == Heading::West);
    }
    p.pairs.push_back({od, major ? major_weight : background_weight, major});
  }
  const bool any = std::any_of(p.pairs.begin(), p.pairs.end(),
                               [](const WeightedOd& w) { return w.weight > 0.0; });
  if (!any) throw ConfigError("demand pattern has no OD pair with positive weight");
  return p;
}

TrajectoryDataset generate_dataset(const roadnet::RoadNetwork& net, const DemandPattern& pattern,
                                   const RouteChoiceModel& model, const GeneratorConfig& cfg) {
  if (cfg.n < 1) throw ContractError("generate_dataset: n must be >= 1");
  if (!(cfg.depart_horizon_min > 0.0) || !(cfg.link_travel_min > 0.0)) {
    throw ConfigError("departure horizon and link travel time must be positive");
  }
  model.validate();
  std::vector<double> od_weights;
  std::vector<std::vector<roadnet::Route>> routes;
  std::vector<std::vector<double>> probs;
  for (const WeightedOd& w : pattern.pairs) {
    if (!net.is_link(w.od.origin) || !net.is_link(w.od.dest)) {
      throw ContractError("demand pattern references links absent from the network");
    }
    auto r = roadnet::enumerate_routes(net, w.od.origin, w.od.dest, cfg.route_slack,
                                       cfg.route_cap);
    if (r.empty()) {
      od_weights.push_back(0.0);
      routes.emplace_back();
      probs.emplace_back();
      continue;
    }
    od_weights.push_back(w.weight);
    probs.push_back(route_choice_probabilities(r, route_costs(r), model));
    routes.push_back(std::move(r));
  }

  TrajectoryDataset ds(cfg.n);
  parallel_for(cfg.n, cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    const std::size_t k = rng.categorical(od_weights);
    const std::size_t r = rng.categorical(probs[k]);
    Trajectory& t = ds[i];
    t.id = static_cast<std::int64_t>(i);
    t.path = routes[k][r];
    t.depart = rng.uniform(0.0, cfg.depart_horizon_min);
  });
  return ds;
}

std::pair<TrajectoryDataset, TrajectoryDataset> split_train_test(const TrajectoryDataset& ds,
                                                                 double ratio,
                                                                 std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("split ratio must lie in (0, 1)");
  const std::size_t n = ds.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, kSplitStream));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::pair<TrajectoryDataset, TrajectoryDataset> out;
  for (auto i : a) out.first.push_back(ds[i]);
  for (auto i : b) out.second.push_back(ds[i]);
  return out;
}

nlohmann::json dataset_metadata(const DemandPattern& pattern, const RouteChoiceModel& model,
                                const GeneratorConfig& cfg) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& w : pattern.pairs) {
    pairs.push_back({{"origin", w.od.origin}, {"dest", w.od.dest}, {"weight", w.weight},
                     {"major", w.major}});
  }
  return {{"seed", cfg.seed},
          {"n", cfg.n},
          {"pattern", to_string(pattern.kind)},
          {"od_pairs", pairs},
          {"route_choice",
           {{"kind", to_string(model.kind)},
            {"theta", model.theta},
            {"alpha", model.alpha},
            {"beta_cf", model.beta_cf},
            {"gamma_cf", model.gamma_cf},
            {"p", model.p}}},
          {"depart_horizon_min", cfg.depart_horizon_min},
          {"link_travel_min", cfg.link_travel_min},
          {"route_slack", cfg.route_slack},
          {"route_cap", cfg.route_cap}};
}

}  // namespace trajlab::demandgen
