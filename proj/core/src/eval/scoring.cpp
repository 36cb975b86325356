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

#include "trajlab/eval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/parallel.hpp"
#include "trajlab/common/random.hpp"
#include "trajlab/eval/sequence_scores.hpp"

namespace trajlab::eval {

const char* to_string(Metric m) noexcept { return m == Metric::BLEU ? "BLEU" : "METEOR"; }

double score_pair(const MetricSpec& m, std::span<const std::int32_t> candidate,
                  std::span<const std::int32_t> reference) {
  if (candidate.empty()) return 0.0;
  return m.metric == Metric::BLEU ? bleu(candidate, reference, m.bleu_n)
                                  : meteor(candidate, reference);
}

std::vector<double> max_score_eval(const demandgen::TrajectoryDataset& generated,
                                   const demandgen::TrajectoryDataset& reference,
                                   const MetricSpec& metric, std::size_t workers) {
  if (reference.empty()) throw EvalError("max_score_eval: empty reference set");
  std::vector<const demandgen::Trajectory*> refs;
  {
    std::unordered_map<std::string, bool> seen;
    for (const auto& t : reference) {
      if (seen.emplace(demandgen::route_key(t), true).second) refs.push_back(&t);
    }
  }
  // Score each distinct generated route once.
  std::unordered_map<std::string, std::size_t> slot_of;
  std::vector<std::size_t> slot(generated.size());
  std::vector<const demandgen::Trajectory*> uniq;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    auto [it, fresh] = slot_of.emplace(demandgen::route_key(generated[i]), uniq.size());
    if (fresh) uniq.push_back(&generated[i]);
    slot[i] = it->second;
  }
  std::vector<double> best(uniq.size(), 0.0);
  parallel_for(uniq.size(), workers, [&](std::size_t u) {
    double s = 0.0;
    for (const auto* r : refs) s = std::max(s, score_pair(metric, uniq[u]->path, r->path));
    best[u] = s;
  });
  std::vector<double> out(generated.size());
  for (std::size_t i = 0; i < generated.size(); ++i) out[i] = best[slot[i]];
  return out;
}

MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(v.size()));
  return r;
}

PredictionResult prediction_score_eval(models::PrefixModel& model,
                                       const demandgen::TrajectoryDataset& test,
                                       const PredictionConfig& cfg,
                                       std::span<const std::uint32_t> contexts) {
  if (cfg.given == 0) throw ContractError("prediction_score_eval: g must be >= 1");
  if (cfg.samples == 0) throw ContractError("prediction_score_eval: N must be >= 1");
  if (cfg.metrics.empty()) throw ContractError("prediction_score_eval: no metric");
  if (!contexts.empty() && contexts.size() != test.size()) {
    throw ContractError("prediction_score_eval: one context per trajectory required");
  }
  PredictionResult res;
  std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> acc;
  const std::size_t nm = cfg.metrics.size();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& tr = test[i];
    const std::size_t m = tr.path.size();
    if (m <= cfg.given) {
      ++res.skipped;
      continue;
    }
    const std::span<const std::int32_t> prefix(tr.path.data(), cfg.given);
    const std::span<const std::int32_t> truth(tr.path.data() + cfg.given, m - cfg.given);
    PredictionCase pc;
    pc.index = i;
    pc.length = m;
    pc.mean_score.assign(nm, 0.0);
    std::vector<demandgen::Trajectory> conts;
    try {
      conts = models::sample_continuations(model, prefix, contexts.empty() ? 0 : contexts[i],
                                           cfg.samples, cfg.max_len, derive_seed(cfg.seed, i));
    } catch (const SamplingError&) {
      conts.clear();
    }
    if (conts.empty()) {
      pc.failed = cfg.samples;
    } else {
      for (const auto& c : conts) {
        if (!c.complete) {
          ++pc.failed;
          continue;
        }
        for (std::size_t k = 0; k < nm; ++k) {
          pc.mean_score[k] += score_pair(cfg.metrics[k], c.path, truth);
        }
      }
    }
    for (double& v : pc.mean_score) v /= static_cast<double>(cfg.samples);
    res.flagged += pc.failed;
    auto& [sum, count] = acc[m];
    sum.resize(nm, 0.0);
    for (std::size_t k = 0; k < nm; ++k) sum[k] += pc.mean_score[k];
    ++count;
    res.cases.push_back(std::move(pc));
  }
  for (auto& [m, sc] : acc) {
    std::vector<double> v = sc.first;
    for (double& x : v) x /= static_cast<double>(sc.second);
    res.by_length.emplace(m, std::move(v));
  }
  return res;
}

std::vector<double> step_probabilities(models::PrefixModel& model,
                                       std::span<const std::int32_t> path, std::uint32_t context) {
  std::vector<double> p;
  p.reserve(path.size());
  std::size_t h = model.root(context);
  for (std::size_t j = 0; j < path.size(); ++j) {
    const double q = model.transition_probability(h, path[j]);
    p.push_back(q);
    if (j + 1 < path.size()) {
      const bool ok = model.is_root(h)
                          ? model.domain().origin_slot(path[j]).has_value()
                          : model.domain().slot_between(model.token(h), path[j]).has_value();
      if (!ok) {
        // The rest of the path is outside the domain: zero from here on.
        p.resize(path.size(), 0.0);
        break;
      }
      h = model.child(h, path[j]);
    }
  }
  return p;
}

void fill_ccdf(CppResult& r) {
  r.grid.clear();
  r.ccdf.clear();
  std::vector<double> v = r.values;
  std::sort(v.begin(), v.end());
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    r.grid.push_back(x);
    if (v.empty()) {
      r.ccdf.push_back(0.0);
      continue;
    }
    // Tolerate rounding in products that are 1 or a grid value in exact arithmetic.
    const auto it = std::lower_bound(v.begin(), v.end(), x - 1e-12);
    r.ccdf.push_back(static_cast<double>(v.end() - it) / static_cast<double>(v.size()));
  }
  r.auc = 0.0;
  for (std::size_t i = 1; i < r.grid.size(); ++i) {
    r.auc += 0.5 * (r.ccdf[i] + r.ccdf[i - 1]) * (r.grid[i] - r.grid[i - 1]);
  }
}

CppResult cpp_k(models::PrefixModel& model, const demandgen::TrajectoryDataset& test,
                std::size_t k, std::size_t g, std::span<const std::uint32_t> contexts) {
  if (k == 0) throw ContractError("cpp_k: k must be >= 1");
  if (!contexts.empty() && contexts.size() != test.size()) {
    throw ContractError("cpp_k: one context per trajectory required");
  }
  CppResult r;
  r.k = k;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const auto& path = test[t].path;
    const std::size_t m = path.size();
    if (m < k + 1) continue;
    const auto p = step_probabilities(model, path, contexts.empty() ? 0 : contexts[t]);
    const std::size_t lo = g > 0 ? g : 1;
    const std::size_t hi = g > 0 ? g : m - k;
    for (std::size_t i = lo; i <= hi && i + k <= m; ++i) {
      double c = 1.0;
      for (std::size_t j = i; j < i + k; ++j) c *= p[j];
      r.values.push_back(c);
    }
  }
  fill_ccdf(r);
  return r;
}

}  // namespace trajlab::eval
