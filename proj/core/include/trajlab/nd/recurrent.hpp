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

#include <span>
#include <string>
#include <vector>

#include "trajlab/common/random.hpp"
#include "trajlab/nd/autodiff.hpp"
#include "trajlab/nd/parameters.hpp"

namespace trajlab::nd {

enum class CellKind { GRU, LSTM };

const char* to_string(CellKind k) noexcept;
CellKind cell_kind_from_string(const std::string& s);

struct RecurrentCellConfig {
  CellKind kind = CellKind::GRU;
  std::size_t input_size = 1;
  std::size_t hidden_size = 64;
  std::size_t layers = 3;

  void validate() const;
};

// Gate weights are fused: U is [I x gH], W is [H x gH], b is [1 x gH] with
// g = 3 (z, r, h) for GRU and g = 4 (i, f, g, o) for LSTM.
struct CellWeights {
  Var U;
  Var W;
  Var b;
};

// s = (1 - z) * h + z * s_prev
//   z = sigmoid(x Uz + s_prev Wz + bz), r = sigmoid(x Ur + s_prev Wr + br)
//   h = tanh(x Uh + (s_prev * r) Wh + bh)
Var gru_step(const Var& x, const Var& s_prev, const CellWeights& w);
Var gru_step(const Var& x, const Var& s_prev, const ParameterSet& params,
             const std::string& prefix);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_step(const Var& x, const LstmState& state, const CellWeights& w);
LstmState lstm_step(const Var& x, const LstmState& state,
                    const ParameterSet& params, const std::string& prefix);

// Registers U/W/b under "<prefix>.U" etc. Weights ~ U(-1/sqrt(H), 1/sqrt(H)),
// biases zero.
void init_cell(ParameterSet& params, const std::string& prefix, CellKind kind,
               std::size_t input, std::size_t hidden, Rng& rng);
CellWeights cell_weights(const ParameterSet& params, const std::string& prefix);

// Per-layer hidden (and, for LSTM, cell) states of a batch.
struct RecurrentState {
  std::vector<Var> h;
  std::vector<Var> c;
  std::size_t batch() const { return h.empty() ? 0 : h.front().rows(); }
};

// Stack of cfg.layers cells; layer l > 0 consumes layer l-1's hidden state.
class RecurrentStack {
 public:
  RecurrentStack() = default;
  RecurrentStack(RecurrentCellConfig cfg, std::string prefix);

  const RecurrentCellConfig& config() const noexcept { return cfg_; }
  const std::string& prefix() const noexcept { return prefix_; }
  std::string layer_prefix(std::size_t l) const;

  void init(ParameterSet& params, Rng& rng) const;
  RecurrentState zero_state(std::size_t batch) const;
  RecurrentState step(const ParameterSet& params, const Var& x,
                      const RecurrentState& prev) const;
  static RecurrentState gather(const RecurrentState& s,
                               std::span<const std::size_t> idx);
  static const Var& top(const RecurrentState& s) { return s.h.back(); }

 private:
  RecurrentCellConfig cfg_;
  std::string prefix_;
};

}  // namespace trajlab::nd
