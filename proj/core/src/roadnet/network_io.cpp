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

#include "trajlab/roadnet/network_io.hpp"

#include <fstream>

#include "trajlab/common/errors.hpp"

namespace trajlab::roadnet {

using nlohmann::json;

json to_json(const RoadNetwork& net) {
  json j;
  j["rows"] = net.rows();
  j["cols"] = net.cols();
  json links = json::array();
  for (const Link& k : net.links()) {
    links.push_back({{"id", k.id},
                     {"from_xy", {k.from.x, k.from.y}},
                     {"to_xy", {k.to.x, k.to.y}},
                     {"length_m", k.length_m}});
  }
  j["links"] = std::move(links);
  json next = json::array();
  const auto& table = net.next_table();
  for (std::size_t o = 0; o < table.size(); ++o) {
    for (std::size_t a = 0; a < kNumActions; ++a) {
      if (table[o][a] != kNone) next.push_back({{"o", o}, {"a", a}, {"o2", table[o][a]}});
    }
  }
  j["next_obs"] = std::move(next);
  j["entry"] = net.entry_links();
  j["exit"] = net.exit_links();
  return j;
}

RoadNetwork network_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    std::vector<Link> links;
    for (const json& k : j.at("links")) {
      Link l;
      l.id = k.at("id").get<LinkId>();
      const auto f = k.at("from_xy").get<std::array<double, 2>>();
      const auto t = k.at("to_xy").get<std::array<double, 2>>();
      l.from = {f[0], f[1]};
      l.to = {t[0], t[1]};
      l.length_m = k.at("length_m").get<double>();
      links.push_back(l);
    }
    std::sort(links.begin(), links.end(),
              [](const Link& a, const Link& b) { return a.id < b.id; });
    std::vector<std::array<ObservationId, kNumActions>> next(links.size());
    for (auto& row : next) row.fill(kNone);
    for (const json& e : j.at("next_obs")) {
      const auto o = e.at("o").get<std::int64_t>();
      const auto a = e.at("a").get<std::int64_t>();
      const auto o2 = e.at("o2").get<ObservationId>();
      if (o < 0 || o >= static_cast<std::int64_t>(links.size()) || a < 0 ||
          a >= static_cast<std::int64_t>(kNumActions)) {
        throw IoError("next_obs entry out of range");
      }
      if (next[o][a] != kNone) throw IoError("next_obs is not a function (duplicate (o, a))");
      next[o][a] = o2;
    }
    return RoadNetwork(rows, cols, std::move(links), std::move(next),
                       j.at("entry").get<std::vector<LinkId>>(),
                       j.at("exit").get<std::vector<LinkId>>());
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed network file: ") + e.what());
  } catch (const ContractError& e) {
    throw IoError(std::string("invalid network: ") + e.what());
  }
}

void save_network(const RoadNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(net).dump(1) << '\n';
}

RoadNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return network_from_json(j);
}

}  // namespace trajlab::roadnet
