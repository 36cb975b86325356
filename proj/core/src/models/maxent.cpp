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

#include "trajlab/models/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t npos = static_cast<std::size_t>(-1);

double lse(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

const char* to_string(MaxEntMode m) noexcept { return m == MaxEntMode::SVF ? "SVF" : "SAVF"; }

MaxEntMode maxent_mode_from_string(const std::string& s) {
  if (s == "SVF") return MaxEntMode::SVF;
  if (s == "SAVF") return MaxEntMode::SAVF;
  throw ConfigError("unknown MaxEnt mode: " + s);
}

MaxEntModel::MaxEntModel(const Domain& domain, MaxEntMode mode, std::size_t horizon,
                         std::vector<double> weights, std::vector<double> origin)
    : domain_(domain), mode_(mode), horizon_(horizon), w_(std::move(weights)),
      origin_(std::move(origin)) {
  if (horizon_ < 3) throw ContractError("MaxEnt horizon must be >= 3");
  const std::size_t N = domain_.num_locations(), S = domain_.num_slots();
  const std::size_t nf = mode_ == MaxEntMode::SVF ? N + 1 : (N + 1) * S;
  if (w_.size() != nf) throw DimensionError("MaxEnt weight vector has the wrong length");
  if (origin_.size() != domain_.num_origins()) throw DimensionError("MaxEnt origin length");
  solve();
}

std::size_t MaxEntModel::state_of(ObservationId o) const {
  if (o == kEnd) return domain_.num_locations();
  if (o < 0 || static_cast<std::size_t>(o) >= domain_.num_locations()) {
    throw ContractError("MaxEnt state out of range");
  }
  return static_cast<std::size_t>(o);
}

std::size_t MaxEntModel::feature(std::size_t state, std::size_t slot) const {
  return mode_ == MaxEntMode::SVF ? state : state * domain_.num_slots() + slot;
}

std::size_t MaxEntModel::next_state(std::size_t state, std::size_t slot) const {
  const std::size_t N = domain_.num_locations();
  if (state == N) return slot == domain_.end_slot() ? N : npos;
  const ObservationId to = domain_.next(static_cast<ObservationId>(state), slot);
  if (to == kNone) return npos;
  return to == kEnd ? N : static_cast<std::size_t>(to);
}

void MaxEntModel::solve() {
  const std::size_t N = domain_.num_locations(), S = domain_.num_slots(), H = horizon_;
  const bool svf = mode_ == MaxEntMode::SVF;
  std::vector<double> next(N + 1, kNegInf), cur(N + 1);
  next[N] = svf ? w_[N] : 0.0;
  pi_.assign((H - 1) * (N + 1) * S, 0.0);
  std::vector<double> q(S);
  for (std::size_t t = H - 1; t-- > 0;) {
    for (std::size_t s = 0; s <= N; ++s) {
      for (std::size_t a = 0; a < S; ++a) {
        const std::size_t n = next_state(s, a);
        q[a] = n == npos ? kNegInf : next[n] + (svf ? 0.0 : w_[feature(s, a)]);
      }
      const double z = lse(q);
      cur[s] = z == kNegInf ? kNegInf : z + (svf ? w_[s] : 0.0);
      if (z == kNegInf) continue;  // cannot reach End in time; filled below
      double* row = &pi_[(t * (N + 1) + s) * S];
      for (std::size_t a = 0; a < S; ++a) row[a] = q[a] == kNegInf ? 0.0 : std::exp(q[a] - z);
    }
    next.swap(cur);
  }
  // Fallback rows: step 0 when defined there, else uniform over admissible.
  for (std::size_t s = 0; s <= N; ++s) {
    double* row0 = &pi_[s * S];
    double z0 = 0.0;
    for (std::size_t a = 0; a < S; ++a) z0 += row0[a];
    if (z0 == 0.0) {
      std::size_t k = 0;
      for (std::size_t a = 0; a < S; ++a) k += next_state(s, a) != npos;
      for (std::size_t a = 0; a < S; ++a) {
        row0[a] = next_state(s, a) != npos ? 1.0 / static_cast<double>(k) : 0.0;
      }
    }
    for (std::size_t t = 1; t + 1 < H; ++t) {
      double* row = &pi_[(t * (N + 1) + s) * S];
      double z = 0.0;
      for (std::size_t a = 0; a < S; ++a) z += row[a];
      if (z == 0.0) std::copy_n(row0, S, row);
    }
  }
}

std::span<const double> MaxEntModel::policy(std::size_t t, ObservationId loc) const {
  const std::size_t N = domain_.num_locations(), S = domain_.num_slots();
  t = std::min(t, horizon_ - 2);
  return {&pi_[(t * (N + 1) + state_of(loc)) * S], S};
}

std::vector<double> MaxEntModel::expected_features() const {
  const std::size_t N = domain_.num_locations(), S = domain_.num_slots(), H = horizon_;
  const bool svf = mode_ == MaxEntMode::SVF;
  std::vector<double> f(w_.size(), 0.0);
  std::vector<double> d(N + 1, 0.0), nd(N + 1);
  for (std::size_t o = 0; o < origin_.size(); ++o) {
    d[state_of(domain_.origin_location(o))] += origin_[o];
  }
  for (std::size_t t = 0; t + 1 < H; ++t) {
    std::fill(nd.begin(), nd.end(), 0.0);
    for (std::size_t s = 0; s <= N; ++s) {
      if (d[s] == 0.0) continue;
      if (svf) f[s] += d[s];
      const double* row = &pi_[(t * (N + 1) + s) * S];
      for (std::size_t a = 0; a < S; ++a) {
        if (row[a] == 0.0) continue;
        const double m = d[s] * row[a];
        nd[next_state(s, a)] += m;
        if (!svf) f[feature(s, a)] += m;
      }
    }
    d.swap(nd);
  }
  if (svf) {
    for (std::size_t s = 0; s <= N; ++s) f[s] += d[s];
  }
  return f;
}

std::vector<double> MaxEntModel::empirical_features(const demandgen::TrajectoryDataset& ds) const {
  if (ds.empty()) throw ContractError("MaxEnt: empty dataset");
  const std::size_t N = domain_.num_locations(), H = horizon_;
  const bool svf = mode_ == MaxEntMode::SVF;
  std::vector<double> f(w_.size(), 0.0);
  for (const auto& t : ds) {
    if (!t.complete || t.path.empty()) throw ContractError("MaxEnt: trajectories must be complete");
    if (t.path.size() + 1 > H) throw ContractError("MaxEnt: trajectory longer than the horizon");
    if (!domain_.accepts(t)) throw ContractError("MaxEnt: trajectory not admissible");
    std::vector<std::size_t> states;
    for (auto l : t.path) states.push_back(state_of(l));
    states.resize(H, N);
    for (std::size_t k = 0; k < H; ++k) {
      if (svf) {
        f[states[k]] += 1.0;
      } else if (k + 1 < H) {
        const std::size_t s = states[k];
        const std::size_t a = s == N ? domain_.end_slot()
                                     : *domain_.slot_between(static_cast<ObservationId>(s),
                                                             states[k + 1] == N
                                                                 ? kEnd
                                                                 : static_cast<ObservationId>(states[k + 1]));
        f[feature(s, a)] += 1.0;
      }
    }
  }
  for (double& v : f) v /= static_cast<double>(ds.size());
  return f;
}

MaxEntModel maxent_train(const Domain& domain, const demandgen::TrajectoryDataset& ds,
                         const MaxEntConfig& cfg, MaxEntHistory* history) {
  if (domain.granularity() != Granularity::Link) {
    throw ContractError("maxent_train: link granularity required");
  }
  if (ds.empty()) throw ContractError("maxent_train: empty dataset");
  if (!(cfg.lr > 0.0) || cfg.iters == 0) throw ConfigError("maxent_train: bad lr or iters");
  std::size_t longest = 0;
  std::vector<double> origin(domain.num_origins(), 0.0);
  for (const auto& t : ds) {
    longest = std::max(longest, t.path.size());
    if (t.path.empty()) throw ContractError("maxent_train: empty trajectory");
    const auto o = domain.origin_slot(t.path.front());
    if (!o) throw ContractError("maxent_train: trajectory does not start at an origin");
    origin[*o] += 1.0;
  }
  for (double& v : origin) v /= static_cast<double>(ds.size());
  const std::size_t H = cfg.horizon ? cfg.horizon : longest + 2;
  const std::size_t N = domain.num_locations();
  const std::size_t nf = cfg.mode == MaxEntMode::SVF ? N + 1 : (N + 1) * domain.num_slots();

  MaxEntModel model(domain, cfg.mode, H, std::vector<double>(nf, 0.0), origin);
  const std::vector<double> emp = model.empirical_features(ds);
  MaxEntHistory hist;
  std::size_t growing = 0;
  for (std::size_t it = 0;; ++it) {
    const std::vector<double> exp = model.expected_features();
    double gap = 0.0;
    for (std::size_t k = 0; k < nf; ++k) gap = std::max(gap, std::abs(emp[k] - exp[k]));
    if (!std::isfinite(gap)) throw TrainingError("maxent_train: non-finite visitation gap");
    if (!hist.gap.empty() && gap > hist.gap.back()) {
      if (++growing >= 10) {
        throw TrainingError("maxent_train: visitation gap grew for 10 consecutive iterations");
      }
    } else {
      growing = 0;
    }
    hist.gap.push_back(gap);
    if (gap < cfg.tolerance) {
      hist.converged = true;
      break;
    }
    if (it == cfg.iters) break;
    std::vector<double> w = model.weights();
    for (std::size_t k = 0; k < nf; ++k) w[k] += cfg.lr * (emp[k] - exp[k]);
    model = MaxEntModel(domain, cfg.mode, H, std::move(w), origin);
  }
  if (history) *history = std::move(hist);
  return model;
}

void MaxEntSession::compute(std::size_t first) {
  auto& dist = distributions();
  for (std::size_t h = first; h < num_nodes(); ++h) {
    if (is_root(h)) {
      dist[h] = m_.origin();
      continue;
    }
    const auto p = m_.policy(depth(h) - 1, token(h));
    dist[h].assign(p.begin(), p.end());
  }
}

}  // namespace trajlab::models
