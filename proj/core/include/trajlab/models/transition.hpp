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

#include <vector>

#include "trajlab/demandgen/trajectory.hpp"
#include "trajlab/models/domain.hpp"
#include "trajlab/models/rollout.hpp"
#include "trajlab/nd/tensor.hpp"

namespace trajlab::models {

// First-order transition counts. Rows: locations 0..N-1 then Start (row N);
// columns: locations 0..N-1 then End (column N).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  static TransitionMatrix fit(const Domain& domain, const demandgen::TrajectoryDataset& ds);
  static TransitionMatrix from_counts(const Domain& domain, nd::Tensor counts);

  const Domain& domain() const noexcept { return domain_; }
  std::size_t num_locations() const noexcept { return domain_.num_locations(); }
  const nd::Tensor& counts() const noexcept { return counts_; }
  const nd::Tensor& probabilities() const noexcept { return probs_; }

  // from: location or kStart; to: location or kEnd.
  double count(ObservationId from, ObservationId to) const;
  double probability(ObservationId from, ObservationId to) const;
  // Row had no observed outgoing transition; its distribution is a fallback
  // (End when admissible, otherwise uniform over admissible moves).
  bool unseen(ObservationId from) const;
  std::size_t num_unseen() const;

 private:
  void normalize();
  std::size_t row(ObservationId from) const;
  std::size_t col(ObservationId to) const;

  Domain domain_;
  nd::Tensor counts_;
  nd::Tensor probs_;
  std::vector<bool> unseen_;
};

class TransitionSession : public PrefixModel {
 public:
  explicit TransitionSession(const TransitionMatrix& m) : m_(m) {}
  const Domain& domain() const override { return m_.domain(); }

 protected:
  void compute(std::size_t first) override;

 private:
  const TransitionMatrix& m_;
};

}  // namespace trajlab::models
