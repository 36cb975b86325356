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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "trajlab/common/errors.hpp"
#include "trajlab/demandgen/demand.hpp"
#include "trajlab/demandgen/route_choice.hpp"
#include "trajlab/demandgen/traffic_state.hpp"
#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/roadnet/network.hpp"

using namespace trajlab;
using namespace trajlab::demandgen;
using roadnet::Route;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RouteChoiceModel model(RouteChoiceKind k) {
  RouteChoiceModel m;
  m.kind = k;
  return m;
}

Trajectory traj(std::vector<std::int32_t> path, double depart, std::int64_t id = 0) {
  Trajectory t;
  t.id = id;
  t.path = std::move(path);
  t.depart = depart;
  return t;
}

}  // namespace

TEST_SUITE("demandgen") {

TEST_CASE("logit over two equal-cost routes is even for any scale") {
  const std::vector<Route> routes{{0, 1, 2}, {0, 3, 2}};
  for (double theta : {0.1, 1.0, 7.5}) {
    RouteChoiceModel m = model(RouteChoiceKind::Logit);
    m.theta = theta;
    const auto p = route_choice_probabilities(routes, route_costs(routes), m);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("fixed choice puts all mass on the cheapest route") {
  const std::vector<Route> routes{{0}, {0}, {0}};
  const auto p = route_choice_probabilities(routes, {4.0, 5.0, 6.0}, model(RouteChoiceKind::Fixed));
  CHECK(p == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("binomial choice follows the rank pmf") {
  const std::vector<Route> routes{{0}, {0}, {0}};
  RouteChoiceModel m = model(RouteChoiceKind::Binomial);
  m.p = 0.3;
  const auto p = route_choice_probabilities(routes, {3.0, 4.0, 5.0}, m);
  // C(2,r) 0.3^r 0.7^(2-r)
  CHECK(p[0] == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.42).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("proportional choice matches cost^-alpha") {
  const std::vector<Route> routes{{0, 1}, {0, 2, 3}, {0, 4, 5, 6}};
  RouteChoiceModel m = model(RouteChoiceKind::Proportional);
  m.alpha = 2.0;
  const auto p = route_choice_probabilities(routes, route_costs(routes), m);
  const double z = 1.0 / 4 + 1.0 / 9 + 1.0 / 16;
  CHECK(p[0] == doctest::Approx(0.25 / z).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx((1.0 / 16) / z).epsilon(1e-12));
}

TEST_CASE("c-logit equals logit when routes share no links") {
  const std::vector<Route> routes{{0, 1}, {2, 3, 4}};
  RouteChoiceModel cl = model(RouteChoiceKind::CLogit), lg = model(RouteChoiceKind::Logit);
  const auto a = route_choice_probabilities(routes, route_costs(routes), cl);
  const auto b = route_choice_probabilities(routes, route_costs(routes), lg);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
}

TEST_CASE("c-logit penalizes overlapping routes") {
  // routes 0 and 1 overlap heavily, route 2 is disjoint; all equal length
  const std::vector<Route> routes{{0, 1, 2, 3}, {0, 1, 2, 4}, {5, 6, 7, 8}};
  const auto p = route_choice_probabilities(routes, route_costs(routes), model(RouteChoiceKind::CLogit));
  CHECK(p[2] > p[0]);
  CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-14));
}

TEST_CASE("invalid route-choice parameters are rejected") {
  RouteChoiceModel m = model(RouteChoiceKind::Binomial);
  m.p = 1.5;
  CHECK_THROWS(m.validate());
}

TEST_CASE("single OD with fixed choice repeats one route") {
  const auto net = roadnet::build_grid(4, 4);
  GeneratorConfig cfg;
  cfg.n = 500;
  cfg.seed = 4;
  const auto ds = generate_dataset(net, make_pattern(net, PatternKind::SingleOD),
                                   model(RouteChoiceKind::Fixed), cfg);
  REQUIRE(ds.size() == 500);
  for (const auto& t : ds) {
    CHECK(t.path == ds.front().path);
    CHECK(is_valid_trajectory(net, t));
  }
}

TEST_CASE("single OD logit spreads evenly over the six routes") {
  const auto net = roadnet::build_grid(4, 4);
  GeneratorConfig cfg;
  cfg.n = 60000;
  cfg.seed = 8;
  const auto ds = generate_dataset(net, make_pattern(net, PatternKind::SingleOD),
                                   model(RouteChoiceKind::Logit), cfg);
  std::map<std::string, std::size_t> freq;
  for (const auto& t : ds) ++freq[route_key(t)];
  REQUIRE(freq.size() == 6);
  // 3 sigma of a multinomial cell at p = 1/6
  for (const auto& [k, c] : freq) CHECK(std::abs(static_cast<double>(c) / 60000.0 - 1.0 / 6.0) < 0.006);
}

TEST_CASE("generation is byte-reproducible and independent of workers") {
  const auto net = roadnet::build_grid(4, 4);
  const auto pattern = make_pattern(net, PatternKind::TwoWayMultiOD);
  GeneratorConfig cfg;
  cfg.n = 800;
  cfg.seed = 21;
  const auto a = generate_dataset(net, pattern, model(RouteChoiceKind::CLogit), cfg);
  cfg.workers = 4;
  const auto b = generate_dataset(net, pattern, model(RouteChoiceKind::CLogit), cfg);
  CHECK(a == b);
  const auto dir = std::filesystem::temp_directory_path();
  write_jsonl(a, dir / "trajlab_a.jsonl");
  write_jsonl(b, dir / "trajlab_b.jsonl");
  CHECK(slurp(dir / "trajlab_a.jsonl") == slurp(dir / "trajlab_b.jsonl"));
  CHECK(read_jsonl(dir / "trajlab_a.jsonl") == a);
  cfg.seed = 22;
  CHECK(generate_dataset(net, pattern, model(RouteChoiceKind::CLogit), cfg) != a);
}

TEST_CASE("multi-OD patterns cover every OD pair with heavier majors") {
  const auto net = roadnet::build_grid(4, 4);
  const auto one = make_pattern(net, PatternKind::OneWayMultiOD);
  const auto two = make_pattern(net, PatternKind::TwoWayMultiOD);
  CHECK(one.pairs.size() == 132);
  CHECK(two.pairs.size() == 132);
  const auto majors = [](const DemandPattern& p) {
    return std::count_if(p.pairs.begin(), p.pairs.end(), [](const WeightedOd& w) { return w.major; });
  };
  CHECK(majors(one) > 0);
  CHECK(majors(two) == 2 * majors(one));
  for (const auto& w : one.pairs) CHECK(w.weight == (w.major ? 10.0 : 1.0));
}

TEST_CASE("train/test split sizes and partition property") {
  TrajectoryDataset ds;
  for (int i = 0; i < 2; ++i) ds.push_back(traj({i}, 0.0, i));
  auto [tr, te] = split_train_test(ds, 0.5, 1);
  CHECK(tr.size() == 1);
  CHECK(te.size() == 1);

  TrajectoryDataset big;
  for (int i = 0; i < 20000; ++i) big.push_back(traj({i % 7, i % 3}, i * 0.01, i));
  auto [a, b] = split_train_test(big, 0.7, 9);
  CHECK(a.size() == 14000);
  CHECK(b.size() == 6000);
  std::vector<std::int64_t> ids;
  for (const auto& t : a) ids.push_back(t.id);
  for (const auto& t : b) ids.push_back(t.id);
  std::sort(ids.begin(), ids.end());
  for (std::int64_t i = 0; i < 20000; ++i) CHECK(ids[static_cast<std::size_t>(i)] == i);
  CHECK(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.id < y.id; }));
}

TEST_CASE("accumulation of an empty dataset is zero") {
  const auto st = compute_accumulation({}, 5, 10.0, 3);
  CHECK(st.accumulation.rows() == 5);
  CHECK(st.accumulation.cols() == 3);
  for (double v : st.accumulation.values()) CHECK(v == 0.0);
}

TEST_CASE("single vehicle against its own maximum reads 1") {
  const TrajectoryDataset ds{traj({3}, 0.0)};
  const auto st = compute_accumulation(ds, 5, 1.0, 1, 1.0);  // sampled at t = 0
  CHECK(st.accumulation.at(3, 0) == 1.0);
  CHECK(st.accumulation.at(2, 0) == 0.0);
}

TEST_CASE("two of four peak vehicles read 0.5") {
  TrajectoryDataset ds{traj({0}, 0.0), traj({0}, 0.5)};
  for (int i = 0; i < 4; ++i) ds.push_back(traj({0}, 10.0));
  AccumulationIndex idx(ds, 1, 1.0);
  CHECK(idx.historical_max()[0] == 4);
  CHECK(idx.counts_at(0.6)[0] == 2);
  const auto st = idx.state_at(1.6, 1, 1.0);  // sampled at t = 0.6
  CHECK(st.accumulation.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("occupancy follows the path one link per travel time") {
  const TrajectoryDataset ds{traj({0, 1, 2}, 5.0)};
  AccumulationIndex idx(ds, 3, 2.0);
  CHECK(idx.counts_at(5.5) == std::vector<std::size_t>{1, 0, 0});
  CHECK(idx.counts_at(7.0) == std::vector<std::size_t>{0, 1, 0});
  CHECK(idx.counts_at(10.9) == std::vector<std::size_t>{0, 0, 1});
  CHECK(idx.counts_at(11.0) == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("route keys and virtual tokens") {
  Trajectory t = traj({4, 7, 9}, 0.0);
  CHECK(route_key(t) == "4-7-9");
  CHECK(with_virtual_tokens(t) == std::vector<std::int32_t>{roadnet::kStart, 4, 7, 9, roadnet::kEnd});
  t.complete = false;
  CHECK(route_key(t) == "4-7-9-?");
  CHECK(with_virtual_tokens(t).back() == 9);
}

}  // TEST_SUITE
