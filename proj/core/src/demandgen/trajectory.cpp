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

#include "trajlab/demandgen/trajectory.hpp"

#include <fstream>
#include <sstream>

#include "trajlab/common/errors.hpp"

namespace trajlab::demandgen {

using nlohmann::json;

std::string route_key(const std::vector<std::int32_t>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(path[i]);
  }
  return out;
}

std::string route_key(const Trajectory& t) {
  std::string k = route_key(t.path);
  if (!t.complete) k += "-?";
  return k;
}

std::vector<ObservationId> with_virtual_tokens(const Trajectory& t) {
  std::vector<ObservationId> out;
  out.reserve(t.path.size() + 2);
  out.push_back(roadnet::kStart);
  out.insert(out.end(), t.path.begin(), t.path.end());
  if (t.complete) out.push_back(roadnet::kEnd);
  return out;
}

bool is_valid_trajectory(const roadnet::RoadNetwork& net, const Trajectory& t) {
  if (t.complete) return net.is_valid_route(t.path);
  if (t.path.empty()) return true;
  if (!net.is_entry(t.path.front())) return false;
  for (std::size_t i = 0; i + 1 < t.path.size(); ++i) {
    if (!net.is_link(t.path[i + 1]) || !net.action_between(t.path[i], t.path[i + 1])) {
      return false;
    }
  }
  return true;
}

json to_json(const Trajectory& t) {
  json j = {{"id", t.id}, {"links", t.path}, {"depart", t.depart}};
  if (!t.complete) j["complete"] = false;
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.id = j.at("id").get<std::int64_t>();
  t.path = j.at("links").get<std::vector<std::int32_t>>();
  t.depart = j.value("depart", 0.0);
  t.complete = j.value("complete", true);
  if (t.depart < 0.0) throw IoError("negative departure time");
  for (auto v : t.path) {
    if (v < 0) throw IoError("virtual tokens must not appear in stored trajectories");
  }
  return t;
}

void write_jsonl(const TrajectoryDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Trajectory& t : ds) out << to_json(t).dump() << '\n';
}

TrajectoryDataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TrajectoryDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ds.push_back(trajectory_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

void write_csv(const TrajectoryDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,depart,complete,links\n";
  for (const Trajectory& t : ds) {
    out << t.id << ',' << json(t.depart).dump() << ',' << (t.complete ? 1 : 0) << ','
        << route_key(t.path) << '\n';
  }
}

void write_sequences_jsonl(const std::vector<std::vector<std::int32_t>>& seqs,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : seqs) out << json(s).dump() << '\n';
}

}  // namespace trajlab::demandgen
