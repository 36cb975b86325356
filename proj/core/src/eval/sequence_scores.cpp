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

#include "trajlab/eval/sequence_scores.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "trajlab/common/errors.hpp"

namespace trajlab::eval {

namespace {

using NGram = std::vector<std::int32_t>;

std::map<NGram, std::size_t> ngram_counts(Sequence s, std::size_t k) {
  std::map<NGram, std::size_t> out;
  for (std::size_t i = 0; i + k <= s.size(); ++i) ++out[NGram(s.begin() + i, s.begin() + i + k)];
  return out;
}

struct Mapping {
  std::size_t cand;
  std::size_t ref;
};

void score_alignment(std::vector<Mapping> maps, MeteorAlignment& out) {
  std::sort(maps.begin(), maps.end(), [](auto a, auto b) { return a.cand < b.cand; });
  out.matches = maps.size();
  out.crossings = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) out.crossings += maps[j].ref < maps[i].ref;
  }
  out.chunks = maps.empty() ? 0 : 1;
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].cand != maps[i - 1].cand + 1 || maps[i].ref != maps[i - 1].ref + 1) ++out.chunks;
  }
}

bool better(const MeteorAlignment& a, const MeteorAlignment& b) {
  if (a.crossings != b.crossings) return a.crossings < b.crossings;
  return a.chunks < b.chunks;
}

// Per token: positions on both sides. Every maximal alignment maps
// min(|c|, |r|) positions of each token.
struct Group {
  std::vector<std::size_t> cand;
  std::vector<std::size_t> ref;
};

void search(const std::vector<Group>& groups, std::size_t g, std::vector<Mapping>& cur,
            MeteorAlignment& best, bool& have) {
  if (g == groups.size()) {
    MeteorAlignment a;
    score_alignment(cur, a);
    if (!have || better(a, best)) {
      best = a;
      have = true;
    }
    return;
  }
  const Group& grp = groups[g];
  const bool cand_small = grp.cand.size() <= grp.ref.size();
  const auto& small = cand_small ? grp.cand : grp.ref;
  const auto& large = cand_small ? grp.ref : grp.cand;
  std::vector<bool> used(large.size(), false);
  // Ordered injections of `small` into `large`.
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == small.size()) {
      search(groups, g + 1, cur, best, have);
      return;
    }
    for (std::size_t j = 0; j < large.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      cur.push_back(cand_small ? Mapping{small[i], large[j]} : Mapping{large[j], small[i]});
      self(self, i + 1);
      cur.pop_back();
      used[j] = false;
    }
  };
  rec(rec, 0);
}

}  // namespace

BleuResult bleu_detail(Sequence candidate, Sequence reference, std::size_t n) {
  if (n == 0) throw ContractError("bleu: n must be >= 1");
  if (candidate.empty() || reference.empty()) throw ContractError("bleu: empty sequence");
  BleuResult r;
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > candidate.size()) {
      r.flagged = true;
      log_sum += std::log(kBleuFloor);
      continue;
    }
    const auto cc = ngram_counts(candidate, k);
    const auto rc = ngram_counts(reference, k);
    std::size_t clipped = 0;
    for (const auto& [g, c] : cc) {
      auto it = rc.find(g);
      if (it != rc.end()) clipped += std::min(c, it->second);
    }
    if (clipped == 0) {
      zero = true;
      break;
    }
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(candidate.size() - k + 1));
  }
  if (zero) return r;
  const double brevity = std::min(1.0, static_cast<double>(candidate.size()) /
                                           static_cast<double>(reference.size()));
  r.score = brevity * std::exp(log_sum / static_cast<double>(n));
  return r;
}

double bleu(Sequence candidate, Sequence reference, std::size_t n) {
  return bleu_detail(candidate, reference, n).score;
}

MeteorAlignment meteor_alignment(Sequence candidate, Sequence reference) {
  std::map<std::int32_t, Group> by_token;
  for (std::size_t i = 0; i < candidate.size(); ++i) by_token[candidate[i]].cand.push_back(i);
  for (std::size_t j = 0; j < reference.size(); ++j) {
    auto it = by_token.find(reference[j]);
    if (it != by_token.end()) it->second.ref.push_back(j);
  }
  std::vector<Group> groups;
  std::size_t matches = 0;
  for (auto& [tok, g] : by_token) {
    if (g.ref.empty()) continue;
    matches += std::min(g.cand.size(), g.ref.size());
    groups.push_back(std::move(g));
  }
  // Leaves of the exhaustive search; <= 8 mappings always fits in 8!.
  double leaves = 1.0;
  for (const auto& g : groups) {
    const std::size_t small = std::min(g.cand.size(), g.ref.size());
    const std::size_t large = std::max(g.cand.size(), g.ref.size());
    for (std::size_t k = 0; k < small; ++k) leaves *= static_cast<double>(large - k);
  }
  MeteorAlignment best;
  if (matches <= kMeteorExactLimit || leaves <= kMeteorExactLeaves) {
    std::vector<Mapping> cur;
    bool have = false;
    search(groups, 0, cur, best, have);
    return best;
  }
  // Greedy: left to right over the candidate, extend the running chunk when
  // possible, else take the earliest free reference position of the token
  // while leaving enough positions for the maximal count.
  std::map<std::int32_t, std::vector<std::size_t>> free_ref;
  std::map<std::int32_t, std::size_t> quota;
  for (const auto& g : groups) {
    const std::int32_t tok = candidate[g.cand.front()];
    free_ref[tok] = g.ref;
    quota[tok] = std::min(g.cand.size(), g.ref.size());
  }
  std::map<std::int32_t, std::size_t> remaining_cand;
  for (auto c : candidate) ++remaining_cand[c];
  std::vector<Mapping> maps;
  std::size_t last_ref = static_cast<std::size_t>(-1);
  bool last_mapped = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const std::int32_t tok = candidate[i];
    const std::size_t left = remaining_cand[tok]--;
    auto q = quota.find(tok);
    if (q == quota.end() || q->second == 0) {
      last_mapped = false;
      continue;
    }
    auto& fr = free_ref[tok];
    auto pick = fr.end();
    if (last_mapped) pick = std::find(fr.begin(), fr.end(), last_ref + 1);
    if (pick == fr.end()) {
      // Skip this occurrence if later candidate occurrences can still fill the quota.
      if (left > q->second && !last_mapped) {
        last_mapped = false;
        continue;
      }
      pick = fr.begin();
    }
    maps.push_back({i, *pick});
    last_ref = *pick;
    last_mapped = true;
    fr.erase(pick);
    --q->second;
  }
  score_alignment(maps, best);
  best.exact = false;
  return best;
}

double meteor(Sequence candidate, Sequence reference) {
  if (candidate.empty() || reference.empty()) throw ContractError("meteor: empty sequence");
  const MeteorAlignment a = meteor_alignment(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double f = 10.0 * p * r / (r + 9.0 * p);
  const double ratio = static_cast<double>(a.chunks) / m;
  return f * (1.0 - 0.5 * ratio * ratio * ratio);
}

}  // namespace trajlab::eval
