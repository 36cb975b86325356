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

#include "trajlab/common/random.hpp"
#include "trajlab/demandgen/demand.hpp"
#include "trajlab/models/domain.hpp"
#include "trajlab/roadnet/network.hpp"
#include "trajlab/tessellate/partition.hpp"

using namespace trajlab;
using namespace trajlab::tessellate;
using roadnet::kEnd;
using roadnet::kStart;

TEST_SUITE("tessellate") {

TEST_CASE("one point is its own centroid") {
  const std::vector<Point> pts{{3.5, -2.0}};
  const auto part = cluster_points(pts, 10.0);
  REQUIRE(part.size() == 1);
  CHECK(part.centroids[0] == pts[0]);
}

TEST_CASE("points 3R apart form two cells") {
  const std::vector<Point> pts{{0.0, 0.0}, {30.0, 0.0}};
  CHECK(cluster_points(pts, 10.0).size() == 2);
}

TEST_CASE("a tight cloud collapses to its mean") {
  Rng rng(5);
  std::vector<Point> pts;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < 100; ++i) {
    pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    sx += pts.back().x;
    sy += pts.back().y;
  }
  const auto part = cluster_points(pts, 10.0);
  REQUIRE(part.size() == 1);
  CHECK(std::abs(part.centroids[0].x - sx / 100.0) < 1e-9);
  CHECK(std::abs(part.centroids[0].y - sy / 100.0) < 1e-9);
}

TEST_CASE("cell sequences bracket, collapse repeats and keep revisits") {
  CellPartition part;
  part.radius = 1.0;
  part.centroids = {{0.0, 0.0}, {10.0, 0.0}};
  const std::vector<Point> same{{0.1, 0.0}, {0.2, 0.1}, {-0.3, 0.0}};
  CHECK(to_cell_sequence(same, part) == std::vector<std::int32_t>{kStart, 0, kEnd});
  const std::vector<Point> alt{{1.0, 0.0}, {9.0, 0.0}, {2.0, 0.0}};
  CHECK(to_cell_sequence(alt, part) == std::vector<std::int32_t>{kStart, 0, 1, 0, kEnd});
}

TEST_CASE("collapsing never lengthens a sequence") {
  Rng rng(12);
  std::vector<Point> cloud;
  for (int i = 0; i < 200; ++i) cloud.push_back({rng.uniform(0, 500), rng.uniform(0, 500)});
  const auto part = cluster_points(cloud, 60.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point> pts;
    const std::size_t n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(0, 500), rng.uniform(0, 500)});
    CHECK(to_cell_sequence(pts, part).size() - 2 <= n);
  }
}

TEST_CASE("ties go to the lower cell id") {
  CellPartition part;
  part.centroids = {{0.0, 0.0}, {2.0, 0.0}};
  CHECK(part.assign({1.0, 0.0}) == 0);
}

TEST_CASE("cell datasets of a grid are admissible in the cell domain") {
  const auto net = roadnet::build_grid(4, 4);
  const auto part = cluster_points(network_points(net, 150.0), 150.0);
  CHECK(part.size() > 1);
  demandgen::GeneratorConfig cfg;
  cfg.n = 200;
  const auto ds = demandgen::generate_dataset(
      net, demandgen::make_pattern(net, demandgen::PatternKind::TwoWayMultiOD), {}, cfg);
  const auto cells = to_cell_dataset(net, ds, part);
  const auto dom = models::Domain::cells(part.size());
  REQUIRE(cells.size() == ds.size());
  for (const auto& t : cells) {
    CHECK(dom.accepts(t));
    for (std::size_t i = 1; i < t.path.size(); ++i) CHECK(t.path[i] != t.path[i - 1]);
  }
}

TEST_CASE("partition JSON round-trips") {
  CellPartition part;
  part.radius = 42.0;
  part.centroids = {{1.25, 2.5}, {-3.0, 7.125}};
  const auto back = partition_from_json(to_json(part));
  CHECK(back.radius == part.radius);
  CHECK(back.centroids == part.centroids);
}

}  // TEST_SUITE
