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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trajlab::roadnet {

using LinkId = std::int32_t;
// Observation ids: links are 0..L-1, the two virtual tokens are negative.
using ObservationId = std::int32_t;
inline constexpr ObservationId kStart = -1;
inline constexpr ObservationId kEnd = -2;
inline constexpr ObservationId kNone = -3;  // no successor

enum class Action : std::uint8_t { Straight = 0, Left = 1, Right = 2, Terminate = 3 };
inline constexpr std::size_t kNumActions = 4;
using ActionMask = std::array<bool, kNumActions>;

const char* to_string(Action a) noexcept;

enum class Heading : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

enum class LinkKind : std::uint8_t { Interior, Entry, Exit };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Link {
  LinkId id = 0;
  Point from;
  Point to;
  double length_m = 0.0;
  Heading heading = Heading::North;
  LinkKind kind = LinkKind::Interior;
};

using Route = std::vector<LinkId>;

struct OdPair {
  LinkId origin = 0;  // entry link
  LinkId dest = 0;    // exit link
  friend bool operator==(const OdPair&, const OdPair&) = default;
  friend auto operator<=>(const OdPair&, const OdPair&) = default;
};

class RoadNetwork {
 public:
  // Assembles a network from raw tables and validates every invariant.
  RoadNetwork(std::size_t rows, std::size_t cols, std::vector<Link> links,
              std::vector<std::array<ObservationId, kNumActions>> next,
              std::vector<LinkId> entry, std::vector<LinkId> exit);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t num_links() const noexcept { return links_.size(); }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Link& link(LinkId id) const;
  bool is_link(ObservationId o) const noexcept {
    return o >= 0 && static_cast<std::size_t>(o) < links_.size();
  }

  const std::vector<LinkId>& entry_links() const noexcept { return entry_; }
  const std::vector<LinkId>& exit_links() const noexcept { return exit_; }
  bool is_entry(LinkId l) const;
  bool is_exit(LinkId l) const;
  std::optional<std::size_t> entry_index(LinkId l) const;

  // T_o(o, a). From Start the slot indexes entry_links(); from a link it is
  // an Action. Masked or out-of-range slots raise InvalidActionError.
  ObservationId next_observation(ObservationId o, std::size_t slot) const;
  ObservationId next_observation(ObservationId o, Action a) const {
    return next_observation(o, static_cast<std::size_t>(a));
  }
  // Raw table entry, kNone when masked.
  ObservationId successor(LinkId l, Action a) const;
  ActionMask action_mask(LinkId l) const;
  // Action taking l to `next` (End for Terminate), if any.
  std::optional<Action> action_between(LinkId l, ObservationId next) const;

  // Entry x exit pairs whose stubs do not share an intersection.
  std::vector<OdPair> od_pairs() const;
  bool same_intersection(LinkId entry, LinkId exit) const;

  // Entry/exit stub attached to boundary intersection (r, c), if any.
  std::optional<LinkId> entry_at(std::size_t r, std::size_t c) const;
  std::optional<LinkId> exit_at(std::size_t r, std::size_t c) const;

  // Link sequence starts at an entry, ends at an exit, and every step is an
  // unmasked transition.
  bool is_valid_route(const Route& route) const;

  double block_length() const noexcept { return block_; }
  // SHA-256 of the canonical JSON encoding.
  std::string hash() const;

  friend bool operator==(const RoadNetwork& a, const RoadNetwork& b);

  const std::vector<std::array<ObservationId, kNumActions>>& next_table() const noexcept {
    return next_;
  }

 private:
  void validate() const;
  std::size_t intersection_of(const Point& p) const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double block_ = 0.0;
  std::vector<Link> links_;
  std::vector<std::array<ObservationId, kNumActions>> next_;
  std::vector<LinkId> entry_;
  std::vector<LinkId> exit_;
  std::vector<std::int32_t> entry_pos_;  // link -> index in entry_, -1 if none
  std::vector<std::uint8_t> exit_flag_;
};

// Four-way grid with one entry and one exit stub per boundary intersection.
// Boundary intersections are assigned to sides walking clockwise from the
// top-left corner: top row (0, 0..cols-2) north, right column
// (0..rows-2, cols-1) east, bottom row (rows-1, cols-1..1) south, left column
// (rows-1..1, 0) west.
RoadNetwork build_grid(std::size_t rows, std::size_t cols, double block_length_m = 100.0);

// Default single-OD pair: entry at (1, 0) heading east, exit at (3, 2) heading
// south on a 4x4 grid; on other grids the same offsets clamped into range.
OdPair default_single_od(const RoadNetwork& net);

// All simple routes origin..dest no longer than shortest + slack links,
// sorted by (length, link ids) and truncated to cap.
std::vector<Route> enumerate_routes(const RoadNetwork& net, LinkId origin, LinkId dest,
                                    std::size_t slack, std::size_t cap);

// Mask for the next step after `history`, which must start with Start.
// After [Start] the mask ranges over entry links; after a link it has 4
// entries; after End it is all-false (4 entries).
std::vector<bool> valid_actions(const RoadNetwork& net,
                                const std::vector<ObservationId>& history);

}  // namespace trajlab::roadnet
