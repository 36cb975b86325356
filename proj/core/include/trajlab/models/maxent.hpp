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
#include <string>
#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/domain.hpp"
#include "trajlab/models/rollout.hpp"

namespace trajlab::models {

enum class MaxEntMode { SVF, SAVF };
const char* to_string(MaxEntMode m) noexcept;
MaxEntMode maxent_mode_from_string(const std::string& s);

struct MaxEntConfig {
  MaxEntMode mode = MaxEntMode::SVF;
  std::size_t iters = 200;
  double lr = 0.1;
  double tolerance = 1e-3;  // on the max-norm visitation gap
  std::size_t horizon = 0;  // 0: longest expert trajectory + 2
};

// Finite-horizon soft-optimal policy under linear rewards on one-hot state
// (SVF) or state-action (SAVF) features. States are the locations plus an
// absorbing End state; every trajectory is padded with End to `horizon`
// states, so all trajectories carry the same number of features.
class MaxEntModel {
 public:
  MaxEntModel() = default;
  MaxEntModel(const Domain& domain, MaxEntMode mode, std::size_t horizon,
              std::vector<double> weights, std::vector<double> origin);

  const Domain& domain() const noexcept { return domain_; }
  MaxEntMode mode() const noexcept { return mode_; }
  std::size_t horizon() const noexcept { return horizon_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  // Probability over origin slots.
  const std::vector<double>& origin() const noexcept { return origin_; }
  std::size_t num_features() const noexcept { return w_.size(); }

  // Slot distribution at step t for location `loc` (t clamped to the last
  // defined step; undefined rows fall back to step 0, then uniform).
  std::span<const double> policy(std::size_t t, ObservationId loc) const;
  // Expected per-trajectory feature counts under the current policy.
  std::vector<double> expected_features() const;
  // Per-trajectory empirical feature counts of a dataset.
  std::vector<double> empirical_features(const demandgen::TrajectoryDataset& ds) const;

 private:
  void solve();
  std::size_t state_of(ObservationId o) const;
  std::size_t feature(std::size_t state, std::size_t slot) const;
  std::size_t next_state(std::size_t state, std::size_t slot) const;  // npos if masked

  Domain domain_;
  MaxEntMode mode_ = MaxEntMode::SVF;
  std::size_t horizon_ = 0;
  std::vector<double> w_;
  std::vector<double> origin_;
  std::vector<double> pi_;  // [(horizon-1) x (N+1) x slots]
};

struct MaxEntHistory {
  std::vector<double> gap;
  bool converged = false;
};

MaxEntModel maxent_train(const Domain& domain, const demandgen::TrajectoryDataset& ds,
                         const MaxEntConfig& cfg, MaxEntHistory* history = nullptr);

class MaxEntSession : public PrefixModel {
 public:
  explicit MaxEntSession(const MaxEntModel& m) : m_(m) {}
  const Domain& domain() const override { return m_.domain(); }

 protected:
  void compute(std::size_t first) override;

 private:
  const MaxEntModel& m_;
};

}  // namespace trajlab::models
