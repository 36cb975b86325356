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

#include "trajlab/models/transition.hpp"

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

std::size_t TransitionMatrix::row(ObservationId from) const {
  if (from == kStart) return num_locations();
  if (from < 0 || static_cast<std::size_t>(from) >= num_locations()) {
    throw ContractError("transition row out of range");
  }
  return static_cast<std::size_t>(from);
}

std::size_t TransitionMatrix::col(ObservationId to) const {
  if (to == kEnd) return num_locations();
  if (to < 0 || static_cast<std::size_t>(to) >= num_locations()) {
    throw ContractError("transition column out of range");
  }
  return static_cast<std::size_t>(to);
}

TransitionMatrix TransitionMatrix::fit(const Domain& domain,
                                       const demandgen::TrajectoryDataset& ds) {
  if (ds.empty()) throw ContractError("fit_transition: empty dataset");
  const std::size_t n = domain.num_locations();
  nd::Tensor counts = nd::Tensor::matrix(n + 1, n + 1);
  for (const auto& t : ds) {
    if (t.path.empty()) continue;
    if (!domain.accepts(t)) throw ContractError("fit_transition: trajectory not admissible");
    ObservationId prev = kStart;
    for (auto loc : t.path) {
      const std::size_t r = prev == kStart ? n : static_cast<std::size_t>(prev);
      counts.at(r, static_cast<std::size_t>(loc)) += 1.0;
      prev = loc;
    }
    if (t.complete) counts.at(static_cast<std::size_t>(prev), n) += 1.0;
  }
  return from_counts(domain, std::move(counts));
}

TransitionMatrix TransitionMatrix::from_counts(const Domain& domain, nd::Tensor counts) {
  const std::size_t n = domain.num_locations();
  if (counts.rank() != 2 || counts.rows() != n + 1 || counts.cols() != n + 1) {
    throw DimensionError("transition counts must be (N+1)x(N+1)");
  }
  TransitionMatrix m;
  m.domain_ = domain;
  m.counts_ = std::move(counts);
  m.normalize();
  return m;
}

void TransitionMatrix::normalize() {
  const std::size_t n = num_locations();
  probs_ = nd::Tensor::matrix(n + 1, n + 1);
  unseen_.assign(n + 1, false);
  for (std::size_t r = 0; r <= n; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c <= n; ++c) {
      const double v = counts_.at(r, c);
      if (v < 0.0) throw ContractError("negative transition count");
      total += v;
    }
    if (total > 0.0) {
      for (std::size_t c = 0; c <= n; ++c) probs_.at(r, c) = counts_.at(r, c) / total;
      continue;
    }
    if (r == n) throw ContractError("transition matrix has no Start transitions");
    unseen_[r] = true;
    const auto loc = static_cast<ObservationId>(r);
    if (domain_.end_allowed(loc)) {
      probs_.at(r, n) = 1.0;
      continue;
    }
    std::vector<std::size_t> cols;
    for (std::size_t s = 0; s < domain_.num_slots(); ++s) {
      const ObservationId to = domain_.next(loc, s);
      if (to == kNone) continue;
      cols.push_back(to == kEnd ? n : static_cast<std::size_t>(to));
    }
    for (auto c : cols) probs_.at(r, c) = 1.0 / static_cast<double>(cols.size());
  }
}

double TransitionMatrix::count(ObservationId from, ObservationId to) const {
  return counts_.at(row(from), col(to));
}

double TransitionMatrix::probability(ObservationId from, ObservationId to) const {
  return probs_.at(row(from), col(to));
}

bool TransitionMatrix::unseen(ObservationId from) const { return unseen_.at(row(from)); }

std::size_t TransitionMatrix::num_unseen() const {
  std::size_t k = 0;
  for (bool u : unseen_) k += u;
  return k;
}

void TransitionSession::compute(std::size_t first) {
  const Domain& dom = domain();
  auto& dist = distributions();
  for (std::size_t h = first; h < num_nodes(); ++h) {
    if (is_root(h)) {
      std::vector<double> p(dom.num_origins(), 0.0);
      for (std::size_t s = 0; s < p.size(); ++s) {
        p[s] = m_.probability(kStart, dom.origin_location(s));
      }
      dist[h] = std::move(p);
      continue;
    }
    const ObservationId loc = token(h);
    std::vector<double> p(dom.num_slots(), 0.0);
    for (std::size_t s = 0; s < p.size(); ++s) {
      const ObservationId to = dom.next(loc, s);
      if (to != kNone) p[s] = m_.probability(loc, to);
    }
    dist[h] = std::move(p);
  }
}

}  // namespace trajlab::models
