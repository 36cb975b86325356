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
#include <filesystem>
#include <functional>
#include <set>

#include "trajlab/common/errors.hpp"
#include "trajlab/roadnet/network.hpp"
#include "trajlab/roadnet/network_io.hpp"

using namespace trajlab;
using namespace trajlab::roadnet;

namespace {

// Every simple path origin..dest by DFS over the raw successor table.
std::vector<Route> all_simple_paths(const RoadNetwork& net, LinkId origin, LinkId dest) {
  std::vector<Route> out;
  Route cur{origin};
  std::vector<bool> on(net.num_links(), false);
  on[origin] = true;
  std::function<void(LinkId)> dfs = [&](LinkId l) {
    if (l == dest) {
      out.push_back(cur);
      return;
    }
    for (Action a : {Action::Straight, Action::Left, Action::Right}) {
      const ObservationId n = net.successor(l, a);
      if (n < 0 || on[n]) continue;
      on[n] = true;
      cur.push_back(n);
      dfs(n);
      cur.pop_back();
      on[n] = false;
    }
  };
  dfs(origin);
  return out;
}

std::size_t boundary_intersections(std::size_t rows, std::size_t cols) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) n += (r == 0 || c == 0 || r + 1 == rows || c + 1 == cols);
  }
  return n;
}

}  // namespace

TEST_SUITE("roadnet") {

TEST_CASE("4x4 grid has 12 entries, 12 exits and 132 OD pairs") {
  const RoadNetwork net = build_grid(4, 4);
  CHECK(net.entry_links().size() == 12);
  CHECK(net.exit_links().size() == 12);
  CHECK(net.od_pairs().size() == 132);
}

TEST_CASE("2x2 grid counts match a brute-force pair count") {
  const RoadNetwork net = build_grid(2, 2);
  CHECK(boundary_intersections(2, 2) == 4);
  CHECK(net.entry_links().size() == 4);
  CHECK(net.exit_links().size() == 4);
  std::size_t pairs = 0;
  for (LinkId e : net.entry_links()) {
    for (LinkId x : net.exit_links()) pairs += !net.same_intersection(e, x);
  }
  CHECK(pairs == 4 * 4 - 4);
  CHECK(net.od_pairs().size() == pairs);
}

TEST_CASE("every non-exit link of a 3x3 grid has a non-terminate move") {
  const RoadNetwork net = build_grid(3, 3);
  for (const Link& l : net.links()) {
    if (net.is_exit(l.id)) continue;
    const ActionMask m = net.action_mask(l.id);
    CHECK((m[0] || m[1] || m[2]));
  }
}

TEST_CASE("only exit links may terminate") {
  const RoadNetwork net = build_grid(4, 4);
  for (const Link& l : net.links()) {
    CHECK(net.action_mask(l.id)[static_cast<std::size_t>(Action::Terminate)] == net.is_exit(l.id));
  }
}

TEST_CASE("terminate on an exit link reaches End") {
  const RoadNetwork net = build_grid(4, 4);
  for (LinkId x : net.exit_links()) CHECK(net.next_observation(x, Action::Terminate) == kEnd);
}

TEST_CASE("a masked action is an invalid-action error") {
  const RoadNetwork net = build_grid(4, 4);
  bool found = false;
  for (const Link& l : net.links()) {
    const ActionMask m = net.action_mask(l.id);
    for (std::size_t a = 0; a < kNumActions; ++a) {
      if (!m[a]) {
        CHECK_THROWS_AS(net.next_observation(l.id, a), InvalidActionError);
        found = true;
      }
    }
  }
  CHECK(found);
}

TEST_CASE("straight chain across a 4-column row crosses cols-1 interior links") {
  const RoadNetwork net = build_grid(2, 4);
  const auto west_entry = net.entry_at(1, 0);
  REQUIRE(west_entry.has_value());
  CHECK(net.link(*west_entry).heading == Heading::East);
  LinkId l = net.successor(*west_entry, Action::Straight);
  LinkId last = *west_entry;
  std::size_t interior = 0;
  while (l >= 0 && net.link(l).kind == LinkKind::Interior) {
    ++interior;
    last = l;
    l = net.successor(l, Action::Straight);
  }
  CHECK(interior == 3);
  // the far boundary intersection's exit stub is one move away
  const auto exit = net.exit_at(1, 3);
  REQUIRE(exit.has_value());
  CHECK(net.action_between(last, *exit).has_value());
}

TEST_CASE("default single OD has exactly six shortest routes") {
  const RoadNetwork net = build_grid(4, 4);
  const OdPair od = default_single_od(net);
  const auto routes = enumerate_routes(net, od.origin, od.dest, 0, 100);
  CHECK(routes.size() == 6);
  // oracle: shortest among all simple paths by exhaustive DFS
  const auto every = all_simple_paths(net, od.origin, od.dest);
  std::size_t shortest = every.front().size();
  for (const auto& r : every) shortest = std::min(shortest, r.size());
  std::set<Route> expect;
  for (const auto& r : every) {
    if (r.size() == shortest) expect.insert(r);
  }
  CHECK(expect.size() == 6);
  CHECK(std::set<Route>(routes.begin(), routes.end()) == expect);
}

TEST_CASE("slack-0 routes share one length and slack widens the set") {
  const RoadNetwork net = build_grid(4, 4);
  for (const OdPair& od : net.od_pairs()) {
    const auto r0 = enumerate_routes(net, od.origin, od.dest, 0, 1000);
    REQUIRE(!r0.empty());
    for (const auto& r : r0) {
      CHECK(r.size() == r0.front().size());
      CHECK(net.is_valid_route(r));
    }
  }
  const OdPair od = default_single_od(net);
  CHECK(enumerate_routes(net, od.origin, od.dest, 2, 1000).size() > 6);
  CHECK(enumerate_routes(net, od.origin, od.dest, 2, 3).size() == 3);
}

TEST_CASE("same-intersection stubs give the U-route only when permitted") {
  const RoadNetwork net = build_grid(4, 4);
  for (LinkId e : net.entry_links()) {
    for (LinkId x : net.exit_links()) {
      if (!net.same_intersection(e, x)) continue;
      const auto routes = enumerate_routes(net, e, x, 0, 10);
      const bool direct = net.action_between(e, x).has_value();
      if (direct) {
        REQUIRE(routes.size() == 1);
        CHECK(routes.front() == Route{e, x});
      } else {
        CHECK((routes.empty() || routes.front().size() > 2));
      }
    }
  }
}

TEST_CASE("valid actions after Start cover entries; after End nothing") {
  const RoadNetwork net = build_grid(4, 4);
  const auto m = valid_actions(net, {kStart});
  CHECK(m.size() == net.entry_links().size());
  CHECK(std::all_of(m.begin(), m.end(), [](bool b) { return b; }));
  const OdPair od = default_single_od(net);
  const auto r = enumerate_routes(net, od.origin, od.dest, 0, 1).front();
  std::vector<ObservationId> h{kStart};
  h.insert(h.end(), r.begin(), r.end());
  h.push_back(kEnd);
  const auto done = valid_actions(net, h);
  CHECK(done.size() == kNumActions);
  CHECK(std::none_of(done.begin(), done.end(), [](bool b) { return b; }));
}

TEST_CASE("network JSON round-trips and the hash is stable") {
  const RoadNetwork net = build_grid(3, 5, 80.0);
  const RoadNetwork back = network_from_json(to_json(net));
  CHECK(back == net);
  CHECK(back.hash() == net.hash());
  CHECK(build_grid(3, 5, 90.0).hash() != net.hash());
  const auto p = std::filesystem::temp_directory_path() / "trajlab_net_rt.json";
  save_network(net, p);
  CHECK(load_network(p) == net);
  std::filesystem::remove(p);
}

TEST_CASE("malformed network JSON is an IO error") {
  auto j = to_json(build_grid(2, 2));
  j["links"][0]["id"] = 99;
  CHECK_THROWS_AS(network_from_json(j), IoError);
}

}  // TEST_SUITE
