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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "trajlab/models/gail.hpp"
#include "trajlab/models/maxent.hpp"
#include "trajlab/models/rnn.hpp"
#include "trajlab/models/transition.hpp"

namespace trajlab::models {

enum class ModelKind { TRN, MMC, RNN, ARNN, SVF, SAVF, TrajGAIL };
const char* to_string(ModelKind k) noexcept;
ModelKind model_kind_from_string(const std::string& s);

// A fitted model of any kind plus what is needed to persist it.
struct TrainedModel {
  ModelKind kind = ModelKind::MMC;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::variant<TransitionMatrix, SequencePolicy, MaxEntModel, TrajGailBundle> model;

  const Domain& domain() const;
};

// Sampling/scoring front end for a trained model. Not movable.
class ModelRunner {
 public:
  explicit ModelRunner(const TrainedModel& m, std::size_t workers = 1);
  ModelRunner(const ModelRunner&) = delete;
  ModelRunner& operator=(const ModelRunner&) = delete;

  PrefixModel& model() { return *session_; }
  // Context id for a departure time (0 for models without traffic state).
  std::uint32_t context_for(double depart) const;

  demandgen::TrajectoryDataset sample(const RolloutConfig& cfg, std::span<const double> departs = {});

 private:
  std::unique_ptr<PolicySampler> sampler_;
  std::unique_ptr<PrefixModel> own_;
  PrefixModel* session_ = nullptr;
};

// <dir>/params.tlab and <dir>/manifest.json with
// {model_kind, granularity, config, seed, net_hash}.
void save_model(const std::filesystem::path& dir, const TrainedModel& m,
                const std::string& net_hash);
// The caller supplies the domain; a net_hash mismatch is an IoError.
TrainedModel load_model(const std::filesystem::path& dir, const Domain& domain,
                        const std::string& net_hash);
nlohmann::json read_model_manifest(const std::filesystem::path& dir);

}  // namespace trajlab::models
