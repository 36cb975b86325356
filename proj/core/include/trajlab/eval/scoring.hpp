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
#include <map>
#include <string>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/rollout.hpp"

namespace trajlab::eval {

enum class Metric { BLEU, METEOR };
const char* to_string(Metric m) noexcept;

struct MetricSpec {
  Metric metric = Metric::BLEU;
  std::size_t bleu_n = 4;
};

// Score of candidate against reference; empty candidates score 0.
double score_pair(const MetricSpec& m, std::span<const std::int32_t> candidate,
                  std::span<const std::int32_t> reference);

// For each generated trajectory the best score over the reference set.
// References are deduplicated by route key first.
std::vector<double> max_score_eval(const demandgen::TrajectoryDataset& generated,
                                   const demandgen::TrajectoryDataset& reference,
                                   const MetricSpec& metric, std::size_t workers = 1);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};
MeanStd mean_std(std::span<const double> v);

struct PredictionConfig {
  std::size_t given = 1;   // g, prefix length handed to the model
  std::size_t samples = 100;
  std::size_t max_len = 50;
  std::uint64_t seed = 0;
  std::vector<MetricSpec> metrics = {{Metric::BLEU, 4}, {Metric::METEOR, 4}};
};

struct PredictionCase {
  std::size_t index = 0;   // into the test dataset
  std::size_t length = 0;  // m
  std::vector<double> mean_score;  // per metric
  std::size_t failed = 0;          // continuations that did not reach End
};

struct PredictionResult {
  std::vector<PredictionCase> cases;
  // Mean of case scores grouped by original length m, per metric.
  std::map<std::size_t, std::vector<double>> by_length;
  std::size_t flagged = 0;  // failed continuations over all cases
  std::size_t skipped = 0;  // test trajectories with length <= g
};

// Continuation scoring from a fixed prefix. Continuations that stop at the
// length cap or hit a zero-mass distribution score 0 and are flagged.
PredictionResult prediction_score_eval(models::PrefixModel& model,
                                       const demandgen::TrajectoryDataset& test,
                                       const PredictionConfig& cfg,
                                       std::span<const std::uint32_t> contexts = {});

// Per-step probabilities the model gives to a trajectory: entry j is the
// probability of location j (0-based) given the locations before it.
std::vector<double> step_probabilities(models::PrefixModel& model,
                                       std::span<const std::int32_t> path,
                                       std::uint32_t context = 0);

struct CppResult {
  std::size_t k = 1;
  std::vector<double> values;  // one per test case
  std::vector<double> grid;    // 0, 0.01, ..., 1
  std::vector<double> ccdf;    // fraction of cases with CPP >= grid[i]
  double auc = 0.0;            // trapezoidal over the grid
};

// Cases are positions i (given prefix of i >= 1 locations, or only i = g
// when g > 0) with i + k <= m; CPP is the product of the probabilities of
// the true next k locations.
CppResult cpp_k(models::PrefixModel& model, const demandgen::TrajectoryDataset& test,
                std::size_t k, std::size_t g = 0,
                std::span<const std::uint32_t> contexts = {});

// CCDF on the 0.01 grid and its trapezoidal area.
void fill_ccdf(CppResult& r);

}  // namespace trajlab::eval
