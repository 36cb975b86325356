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

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajlab/eval/dataset_metrics.hpp"
#include "trajlab/eval/scoring.hpp"

namespace trajlab::eval {

struct ModelEval {
  std::string model;
  MeanStd bleu;
  MeanStd meteor;
  double d_js = 0.0;
  std::size_t unknown = 0;
  std::size_t generated = 0;
  std::size_t incomplete = 0;
  std::vector<CppResult> cpp;  // optional, one per k
  std::optional<double> mean_revisit;
  // Prefix-continuation scores by trajectory length: {BLEU, METEOR}.
  std::map<std::size_t, std::vector<double>> prediction;
  std::optional<std::string> error;  // set when the model could not be scored
};

struct ScenarioEval {
  std::string scenario;
  double real_entropy = 0.0;  // H(D) of the real test set
  std::size_t real_size = 0;
  std::vector<ModelEval> models;
};

struct EvalReport {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<ScenarioEval> scenarios;
};

// Scores a generated set against real data. `reference` feeds the
// max-score evaluation (train set by default upstream), `real` the route
// distribution.
ModelEval evaluate_generated(const std::string& model, const demandgen::TrajectoryDataset& generated,
                             const demandgen::TrajectoryDataset& real,
                             const demandgen::TrajectoryDataset& reference,
                             std::size_t workers = 1);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

// Tables with scenarios as rows and models as columns, best entry of each row
// in bold (lowest d_JS, highest BLEU/METEOR).
std::string render_markdown(const EvalReport& r);
// scenario,model,k,x,ccdf rows for every stored CPP result.
void write_ccdf_csv(std::ostream& os, const EvalReport& r);

}  // namespace trajlab::eval
