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

#include <cstdint>
#include <span>

namespace trajlab::eval {

using Sequence = std::span<const std::int32_t>;

struct BleuResult {
  double score = 0.0;
  // Some order had no candidate n-grams; its precision was floored.
  bool flagged = false;
};

inline constexpr double kBleuFloor = 1e-9;

// Clipped n-gram precisions P_1..P_n, geometric mean, times the brevity
// factor min(1, |candidate| / |reference|). Orders longer than the candidate
// take precision kBleuFloor and set the flag.
BleuResult bleu_detail(Sequence candidate, Sequence reference, std::size_t n = 4);
double bleu(Sequence candidate, Sequence reference, std::size_t n = 4);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t crossings = 0;
  std::size_t chunks = 0;
  bool exact = true;  // false when the greedy fallback was used
};

inline constexpr std::size_t kMeteorExactLimit = 8;
inline constexpr double kMeteorExactLeaves = 40320.0;  // 8!

// Exact-match alignment with the most mappings, then fewest crossings, then
// fewest chunks. Exhaustive up to kMeteorExactLimit mappings or while the
// candidate alignments number at most 8! (always true without repeated
// tokens), greedy beyond.
MeteorAlignment meteor_alignment(Sequence candidate, Sequence reference);
double meteor(Sequence candidate, Sequence reference);

}  // namespace trajlab::eval
