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

#include "trajlab/tessellate/partition.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "trajlab/common/errors.hpp"

namespace trajlab::tessellate {

namespace {

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::int32_t nearest(std::span<const Point> cs, const Point& p) {
  std::int32_t best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double d = dist2(cs[i], p);
    if (d < bd) {
      bd = d;
      best = static_cast<std::int32_t>(i);
    }
  }
  return best;
}

}  // namespace

std::int32_t CellPartition::assign(const Point& p) const {
  if (centroids.empty()) throw ContractError("partition is empty");
  return nearest(centroids, p);
}

CellPartition cluster_points(std::span<const Point> points, double radius) {
  if (points.empty()) throw ContractError("cluster_points: no points");
  if (!(radius > 0.0)) throw ContractError("cluster_points: radius must be positive");
  const double r2 = radius * radius;
  std::vector<Point> leaders;
  std::vector<std::int32_t> label(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::int32_t k = leaders.empty() ? -1 : nearest(leaders, points[i]);
    if (k >= 0 && dist2(leaders[k], points[i]) <= r2) {
      label[i] = k;
    } else {
      label[i] = static_cast<std::int32_t>(leaders.size());
      leaders.push_back(points[i]);
    }
  }
  auto means = [&](std::size_t k_count) {
    std::vector<Point> sum(k_count);
    std::vector<std::size_t> n(k_count, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sum[label[i]].x += points[i].x;
      sum[label[i]].y += points[i].y;
      ++n[label[i]];
    }
    std::vector<Point> out;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (n[k] == 0) continue;
      out.push_back({sum[k].x / static_cast<double>(n[k]), sum[k].y / static_cast<double>(n[k])});
    }
    return out;
  };
  std::vector<Point> centroids = means(leaders.size());

  // Reassignment pass; keep centroids that still own a point, in order.
  std::vector<std::uint8_t> used(centroids.size(), 0);
  for (const Point& p : points) used[nearest(centroids, p)] = 1;
  CellPartition part;
  part.radius = radius;
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    if (!used[k]) continue;
    bool dup = false;
    for (const Point& c : part.centroids) dup = dup || c == centroids[k];
    if (!dup) part.centroids.push_back(centroids[k]);
  }
  return part;
}

std::vector<roadnet::ObservationId> to_cell_sequence(std::span<const Point> points,
                                                     const CellPartition& part) {
  if (points.empty()) throw ContractError("to_cell_sequence: empty point list");
  if (part.centroids.empty()) throw ContractError("to_cell_sequence: empty partition");
  std::vector<roadnet::ObservationId> out{roadnet::kStart};
  for (const Point& p : points) {
    const std::int32_t c = part.assign(p);
    if (out.back() != c) out.push_back(c);
  }
  out.push_back(roadnet::kEnd);
  return out;
}

std::vector<Point> sample_link(const roadnet::Link& link, double step) {
  if (!(step > 0.0)) throw ContractError("sample step must be positive");
  std::vector<Point> out;
  const double dx = link.to.x - link.from.x, dy = link.to.y - link.from.y;
  const double len = std::hypot(dx, dy);
  const auto n = static_cast<std::size_t>(std::ceil(len / step - 1e-9));
  for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
    const double f = std::min(1.0, static_cast<double>(i) * step / len);
    out.push_back({link.from.x + f * dx, link.from.y + f * dy});
  }
  return out;
}

std::vector<Point> sample_route(const roadnet::RoadNetwork& net,
                                const std::vector<std::int32_t>& route, double step) {
  std::vector<Point> out;
  for (auto l : route) {
    auto pts = sample_link(net.link(l), step);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  if (!route.empty()) out.push_back(net.link(route.back()).to);
  return out;
}

std::vector<Point> network_points(const roadnet::RoadNetwork& net, double radius) {
  std::vector<Point> out;
  for (const auto& link : net.links()) {
    auto pts = sample_link(link, radius / 3.0);
    out.insert(out.end(), pts.begin(), pts.end());
    if (link.kind == roadnet::LinkKind::Exit) out.push_back(link.to);
  }
  return out;
}

demandgen::Trajectory to_cell_trajectory(const roadnet::RoadNetwork& net,
                                         const demandgen::Trajectory& t,
                                         const CellPartition& part) {
  const auto pts = sample_route(net, t.path, part.radius / 3.0);
  const auto seq = to_cell_sequence(pts, part);
  demandgen::Trajectory out;
  out.id = t.id;
  out.depart = t.depart;
  out.complete = t.complete;
  out.path.assign(seq.begin() + 1, seq.end() - 1);
  return out;
}

demandgen::TrajectoryDataset to_cell_dataset(const roadnet::RoadNetwork& net,
                                             const demandgen::TrajectoryDataset& ds,
                                             const CellPartition& part) {
  // Routes repeat heavily; convert each distinct one once.
  std::map<std::vector<std::int32_t>, std::vector<std::int32_t>> cache;
  demandgen::TrajectoryDataset out;
  out.reserve(ds.size());
  for (const auto& t : ds) {
    auto it = cache.find(t.path);
    if (it == cache.end()) {
      it = cache.emplace(t.path, to_cell_trajectory(net, t, part).path).first;
    }
    out.push_back({t.id, it->second, t.depart, t.complete});
  }
  return out;
}

nlohmann::json to_json(const CellPartition& part) {
  nlohmann::json cs = nlohmann::json::array();
  for (const Point& c : part.centroids) cs.push_back({c.x, c.y});
  return {{"R", part.radius}, {"centroids", cs}};
}

CellPartition partition_from_json(const nlohmann::json& j) {
  try {
    CellPartition p;
    p.radius = j.at("R").get<double>();
    for (const auto& c : j.at("centroids")) {
      const auto v = c.get<std::array<double, 2>>();
      p.centroids.push_back({v[0], v[1]});
    }
    if (!(p.radius > 0.0) || p.centroids.empty()) throw IoError("invalid partition");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed partition: ") + e.what());
  }
}

void save_partition(const CellPartition& part, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(part).dump(1) << '\n';
}

CellPartition load_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return partition_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed partition: ") + e.what());
  }
}

}  // namespace trajlab::tessellate
