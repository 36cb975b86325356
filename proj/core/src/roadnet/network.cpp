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

#include "trajlab/roadnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/hashing.hpp"
#include "trajlab/roadnet/network_io.hpp"

namespace trajlab::roadnet {

namespace {

constexpr std::array<Point, 4> kDir = {Point{0, 1}, Point{1, 0}, Point{0, -1}, Point{-1, 0}};

Heading turn(Heading h, Action a) {
  const int v = static_cast<int>(h);
  switch (a) {
    case Action::Straight: return h;
    case Action::Left: return static_cast<Heading>((v + 3) % 4);
    case Action::Right: return static_cast<Heading>((v + 1) % 4);
    case Action::Terminate: break;
  }
  throw ContractError("turn() called with Terminate");
}

Heading opposite(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }

Heading heading_of(const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  if (std::abs(dx) >= std::abs(dy)) return dx >= 0 ? Heading::East : Heading::West;
  return dy >= 0 ? Heading::North : Heading::South;
}

struct BoundarySlot {
  std::size_t r, c;
  Heading outward;
};

std::vector<BoundarySlot> boundary_walk(std::size_t rows, std::size_t cols) {
  std::vector<BoundarySlot> out;
  for (std::size_t c = 0; c + 1 < cols; ++c) out.push_back({0, c, Heading::North});
  for (std::size_t r = 0; r + 1 < rows; ++r) out.push_back({r, cols - 1, Heading::East});
  for (std::size_t c = cols - 1; c >= 1; --c) out.push_back({rows - 1, c, Heading::South});
  for (std::size_t r = rows - 1; r >= 1; --r) out.push_back({r, 0, Heading::West});
  return out;
}

}  // namespace

const char* to_string(Action a) noexcept {
  switch (a) {
    case Action::Straight: return "Straight";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Terminate: return "Terminate";
  }
  return "?";
}

RoadNetwork::RoadNetwork(std::size_t rows, std::size_t cols, std::vector<Link> links,
                         std::vector<std::array<ObservationId, kNumActions>> next,
                         std::vector<LinkId> entry, std::vector<LinkId> exit)
    : rows_(rows),
      cols_(cols),
      links_(std::move(links)),
      next_(std::move(next)),
      entry_(std::move(entry)),
      exit_(std::move(exit)) {
  if (rows_ < 2 || cols_ < 2 || rows_ * cols_ > 400) {
    throw ContractError("grid dimensions must satisfy rows, cols >= 2 and rows*cols <= 400");
  }
  if (links_.empty()) throw ContractError("network has no links");
  block_ = links_.front().length_m;
  entry_pos_.assign(links_.size(), -1);
  exit_flag_.assign(links_.size(), 0);
  for (std::size_t i = 0; i < entry_.size(); ++i) {
    if (!is_link(entry_[i])) throw ContractError("entry link id out of range");
    if (entry_pos_[entry_[i]] >= 0) throw ContractError("duplicate entry link");
    entry_pos_[entry_[i]] = static_cast<std::int32_t>(i);
  }
  for (LinkId l : exit_) {
    if (!is_link(l)) throw ContractError("exit link id out of range");
    if (exit_flag_[l]) throw ContractError("duplicate exit link");
    exit_flag_[l] = 1;
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    Link& k = links_[i];
    k.heading = heading_of(k.from, k.to);
    k.kind = entry_pos_[i] >= 0 ? LinkKind::Entry
             : exit_flag_[i]    ? LinkKind::Exit
                                : LinkKind::Interior;
  }
  validate();
}

void RoadNetwork::validate() const {
  if (next_.size() != links_.size()) throw ContractError("next_obs table size mismatch");
  if (entry_.empty() || exit_.empty()) throw ContractError("network needs entry and exit links");
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& k = links_[i];
    if (k.id != static_cast<LinkId>(i)) throw ContractError("link ids must be dense 0..L-1");
    if (!(k.length_m > 0.0) || !std::isfinite(k.length_m)) {
      throw ContractError("link lengths must be positive");
    }
    if (entry_pos_[i] >= 0 && exit_flag_[i]) throw ContractError("link both entry and exit");
    const auto& row = next_[i];
    const bool exit = exit_flag_[i] != 0;
    if (exit) {
      if (row[3] != kEnd) throw ContractError("exit link must terminate to End");
      for (std::size_t a = 0; a < 3; ++a) {
        if (row[a] != kNone) throw ContractError("exit link may only terminate");
      }
      continue;
    }
    if (row[3] != kNone) throw ContractError("only exit links may terminate");
    bool any = false;
    for (std::size_t a = 0; a < 3; ++a) {
      const ObservationId n = row[a];
      if (n == kNone) continue;
      if (!is_link(n)) throw ContractError("successor is not a link");
      if (entry_pos_[n] >= 0) throw ContractError("entry links cannot be successors");
      if (!(links_[n].from == k.to)) throw ContractError("successor does not start where link ends");
      any = true;
    }
    if (!any) throw ContractError("link " + std::to_string(i) + " is a dead end");
  }
}

const Link& RoadNetwork::link(LinkId id) const {
  if (!is_link(id)) throw ContractError("unknown link id " + std::to_string(id));
  return links_[id];
}

bool RoadNetwork::is_entry(LinkId l) const { return is_link(l) && entry_pos_[l] >= 0; }
bool RoadNetwork::is_exit(LinkId l) const { return is_link(l) && exit_flag_[l] != 0; }

std::optional<std::size_t> RoadNetwork::entry_index(LinkId l) const {
  if (!is_entry(l)) return std::nullopt;
  return static_cast<std::size_t>(entry_pos_[l]);
}

ObservationId RoadNetwork::next_observation(ObservationId o, std::size_t slot) const {
  if (o == kStart) {
    if (slot >= entry_.size()) {
      throw InvalidActionError("Start slot " + std::to_string(slot) + " is not an entry link");
    }
    return entry_[slot];
  }
  if (o == kEnd) throw InvalidActionError("no action is available after End");
  if (!is_link(o)) throw InvalidActionError("unknown observation " + std::to_string(o));
  if (slot >= kNumActions) throw InvalidActionError("action index out of range");
  const ObservationId n = next_[o][slot];
  if (n == kNone) {
    throw InvalidActionError(std::string("action ") + to_string(static_cast<Action>(slot)) +
                             " is masked at link " + std::to_string(o));
  }
  return n;
}

ObservationId RoadNetwork::successor(LinkId l, Action a) const {
  return next_[link(l).id][static_cast<std::size_t>(a)];
}

ActionMask RoadNetwork::action_mask(LinkId l) const {
  const auto& row = next_[link(l).id];
  ActionMask m{};
  for (std::size_t a = 0; a < kNumActions; ++a) m[a] = row[a] != kNone;
  return m;
}

std::optional<Action> RoadNetwork::action_between(LinkId l, ObservationId n) const {
  const auto& row = next_[link(l).id];
  for (std::size_t a = 0; a < kNumActions; ++a) {
    if (row[a] != kNone && row[a] == n) return static_cast<Action>(a);
  }
  return std::nullopt;
}

bool RoadNetwork::same_intersection(LinkId entry, LinkId exit) const {
  return link(entry).to == link(exit).from;
}

std::vector<OdPair> RoadNetwork::od_pairs() const {
  std::vector<OdPair> out;
  for (LinkId e : entry_) {
    for (LinkId x : exit_) {
      if (!same_intersection(e, x)) out.push_back({e, x});
    }
  }
  return out;
}

std::size_t RoadNetwork::intersection_of(const Point& p) const {
  const auto c = static_cast<std::size_t>(std::lround(p.x / block_));
  const auto r = rows_ - 1 - static_cast<std::size_t>(std::lround(p.y / block_));
  return r * cols_ + c;
}

std::optional<LinkId> RoadNetwork::entry_at(std::size_t r, std::size_t c) const {
  for (LinkId l : entry_) {
    if (intersection_of(links_[l].to) == r * cols_ + c) return l;
  }
  return std::nullopt;
}

std::optional<LinkId> RoadNetwork::exit_at(std::size_t r, std::size_t c) const {
  for (LinkId l : exit_) {
    if (intersection_of(links_[l].from) == r * cols_ + c) return l;
  }
  return std::nullopt;
}

bool RoadNetwork::is_valid_route(const Route& route) const {
  if (route.empty() || !is_entry(route.front()) || !is_exit(route.back())) return false;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    if (!is_link(route[i + 1]) || !action_between(route[i], route[i + 1])) return false;
  }
  return true;
}

std::string RoadNetwork::hash() const { return sha256_hex(to_json(*this).dump()); }

bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.next_ == b.next_ &&
         a.entry_ == b.entry_ && a.exit_ == b.exit_ && a.links_.size() == b.links_.size() &&
         std::equal(a.links_.begin(), a.links_.end(), b.links_.begin(),
                    [](const Link& x, const Link& y) {
                      return x.id == y.id && x.from == y.from && x.to == y.to &&
                             x.length_m == y.length_m;
                    });
}

RoadNetwork build_grid(std::size_t rows, std::size_t cols, double block) {
  if (rows < 2 || cols < 2 || rows * cols > 400) {
    throw ContractError("build_grid: need rows, cols >= 2 and rows*cols <= 400");
  }
  if (!(block > 0.0) || !std::isfinite(block)) {
    throw ContractError("build_grid: block length must be positive");
  }
  auto at = [&](std::size_t r, std::size_t c) {
    return Point{static_cast<double>(c) * block, static_cast<double>(rows - 1 - r) * block};
  };
  auto shift = [&](Point p, Heading h) {
    const Point d = kDir[static_cast<int>(h)];
    return Point{p.x + d.x * block, p.y + d.y * block};
  };

  std::vector<Link> links;
  // out[v][h]: link leaving intersection v with heading h.
  std::vector<std::array<LinkId, 4>> out(rows * cols, {-1, -1, -1, -1});
  std::vector<std::size_t> arrives;  // intersection each link ends at (non-exit)
  auto add = [&](Point from, Point to, Heading h, LinkKind kind) {
    const auto id = static_cast<LinkId>(links.size());
    links.push_back({id, from, to, block, h, kind});
    return id;
  };

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (int hv = 0; hv < 4; ++hv) {
        const auto h = static_cast<Heading>(hv);
        long nr = static_cast<long>(r), nc = static_cast<long>(c);
        if (h == Heading::North) --nr;
        if (h == Heading::South) ++nr;
        if (h == Heading::East) ++nc;
        if (h == Heading::West) --nc;
        if (nr < 0 || nc < 0 || nr >= static_cast<long>(rows) || nc >= static_cast<long>(cols)) {
          continue;
        }
        out[r * cols + c][hv] = add(at(r, c), at(nr, nc), h, LinkKind::Interior);
        arrives.push_back(static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc));
      }
    }
  }

  std::vector<LinkId> entry, exit;
  for (const BoundarySlot& s : boundary_walk(rows, cols)) {
    const Point p = at(s.r, s.c);
    const Point outside = shift(p, s.outward);
    entry.push_back(add(outside, p, opposite(s.outward), LinkKind::Entry));
    arrives.push_back(s.r * cols + s.c);
    const LinkId x = add(p, outside, s.outward, LinkKind::Exit);
    exit.push_back(x);
    arrives.push_back(std::numeric_limits<std::size_t>::max());
    out[s.r * cols + s.c][static_cast<int>(s.outward)] = x;
  }

  std::vector<std::array<ObservationId, kNumActions>> next(links.size());
  for (const Link& k : links) {
    auto& row = next[k.id];
    row.fill(kNone);
    if (k.kind == LinkKind::Exit) {
      row[3] = kEnd;
      continue;
    }
    const std::size_t v = arrives[k.id];
    for (Action a : {Action::Straight, Action::Left, Action::Right}) {
      const LinkId n = out[v][static_cast<int>(turn(k.heading, a))];
      if (n >= 0) row[static_cast<std::size_t>(a)] = n;
    }
  }
  return RoadNetwork(rows, cols, std::move(links), std::move(next), std::move(entry),
                     std::move(exit));
}

OdPair default_single_od(const RoadNetwork& net) {
  const auto e = net.entry_at(1, 0);
  const auto x = net.exit_at(net.rows() - 1, std::min<std::size_t>(2, net.cols() - 1));
  if (!e || !x) throw ContractError("default single-OD stubs are missing");
  return {*e, *x};
}

std::vector<Route> enumerate_routes(const RoadNetwork& net, LinkId origin, LinkId dest,
                                    std::size_t slack, std::size_t cap) {
  if (!net.is_entry(origin)) throw ContractError("enumerate_routes: origin is not an entry link");
  if (!net.is_exit(dest)) throw ContractError("enumerate_routes: dest is not an exit link");
  if (cap == 0) throw ContractError("enumerate_routes: cap must be >= 1");
  if (net.same_intersection(origin, dest)) {
    if (net.action_between(origin, dest)) return {Route{origin, dest}};
    return {};
  }

  // dist[l]: links after l needed to reach dest.
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  const std::size_t L = net.num_links();
  std::vector<std::vector<LinkId>> preds(L);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t a = 0; a < 3; ++a) {
      const ObservationId n = net.next_table()[l][a];
      if (n >= 0) preds[n].push_back(static_cast<LinkId>(l));
    }
  }
  std::vector<std::size_t> dist(L, kInf);
  std::deque<LinkId> queue{dest};
  dist[dest] = 0;
  while (!queue.empty()) {
    const LinkId l = queue.front();
    queue.pop_front();
    for (LinkId p : preds[l]) {
      if (dist[p] == kInf) {
        dist[p] = dist[l] + 1;
        queue.push_back(p);
      }
    }
  }
  if (dist[origin] == kInf) return {};
  const std::size_t max_len = dist[origin] + 1 + slack;

  std::vector<Route> routes;
  Route path{origin};
  std::vector<std::uint8_t> on_path(L, 0);
  on_path[origin] = 1;
  auto dfs = [&](auto&& self, LinkId l) -> void {
    if (l == dest) {
      routes.push_back(path);
      return;
    }
    for (std::size_t a = 0; a < 3; ++a) {
      const ObservationId n = net.next_table()[l][a];
      if (n < 0 || on_path[n] || dist[n] == kInf) continue;
      if (path.size() + 1 + dist[n] > max_len) continue;
      on_path[n] = 1;
      path.push_back(n);
      self(self, n);
      path.pop_back();
      on_path[n] = 0;
    }
  };
  dfs(dfs, origin);
  std::sort(routes.begin(), routes.end(), [](const Route& a, const Route& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  if (routes.size() > cap) routes.resize(cap);
  return routes;
}

std::vector<bool> valid_actions(const RoadNetwork& net,
                                const std::vector<ObservationId>& history) {
  if (history.empty() || history.front() != kStart) {
    throw ContractError("valid_actions: history must start with Start");
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    const ObservationId o = history[i];
    if (o == kStart) throw ContractError("valid_actions: Start inside history");
    if (o == kEnd && i + 1 != history.size()) {
      throw ContractError("valid_actions: End inside history");
    }
    if (o != kEnd && !net.is_link(o)) throw ContractError("valid_actions: unknown observation");
  }
  const ObservationId last = history.back();
  if (last == kStart) return std::vector<bool>(net.entry_links().size(), true);
  if (last == kEnd) return std::vector<bool>(kNumActions, false);
  const ActionMask m = net.action_mask(last);
  return std::vector<bool>(m.begin(), m.end());
}

}  // namespace trajlab::roadnet
