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
#include "trajlab/nd/recurrent.hpp"

#include <cmath>

#include "trajlab/common/errors.hpp"
#include "trajlab/nd/ops.hpp"

namespace trajlab::nd {

namespace {

std::size_t gate_count(CellKind k) { return k == CellKind::GRU ? 3 : 4; }

void check_cell(const Var& x, const Var& s, const CellWeights& w,
                std::size_t gates, const char* op) {
  const std::size_t hidden = s.cols();
  if (x.rows() != s.rows()) {
    throw DimensionError(std::string(op) + ": batch sizes differ");
  }
  if (w.U.rows() != x.cols() || w.U.cols() != gates * hidden ||
      w.W.rows() != hidden || w.W.cols() != gates * hidden ||
      w.b.value().size() != gates * hidden) {
    throw DimensionError(std::string(op) + ": weights do not conform to x " +
                         shape_string(x.value().shape()) + " and state " +
                         shape_string(s.value().shape()));
  }
}

}  // namespace

const char* to_string(CellKind k) noexcept {
  return k == CellKind::GRU ? "GRU" : "LSTM";
}

CellKind cell_kind_from_string(const std::string& s) {
  if (s == "GRU" || s == "gru") return CellKind::GRU;
  if (s == "LSTM" || s == "lstm") return CellKind::LSTM;
  throw ConfigError("unknown cell kind: " + s);
}

void RecurrentCellConfig::validate() const {
  if (input_size < 1 || hidden_size < 1 || layers < 1) {
    throw ConfigError("recurrent cell sizes must all be >= 1");
  }
}

Var gru_step(const Var& x, const Var& s_prev, const CellWeights& w) {
  check_cell(x, s_prev, w, 3, "gru_step");
  if (!s_prev.value().all_finite()) throw NumericError("gru_step: non-finite state");
  const std::size_t H = s_prev.cols();
  Var xu = add_row(matmul(x, w.U), w.b);
  Var Wzr = slice_cols(w.W, 0, 2 * H);
  Var Wh = slice_cols(w.W, 2 * H, H);
  Var zr = sigmoid(add(slice_cols(xu, 0, 2 * H), matmul(s_prev, Wzr)));
  Var z = slice_cols(zr, 0, H);
  Var r = slice_cols(zr, H, H);
  Var h = tanh(add(slice_cols(xu, 2 * H, H), matmul(mul(s_prev, r), Wh)));
  // (1 - z) h + z s = h + z (s - h)
  return add(h, mul(z, sub(s_prev, h)));
}

Var gru_step(const Var& x, const Var& s_prev, const ParameterSet& params,
             const std::string& prefix) {
  return gru_step(x, s_prev, cell_weights(params, prefix));
}

LstmState lstm_step(const Var& x, const LstmState& st, const CellWeights& w) {
  check_cell(x, st.h, w, 4, "lstm_step");
  if (!st.c.value().same_shape(st.h.value())) {
    throw DimensionError("lstm_step: h and c shapes differ");
  }
  const std::size_t H = st.h.cols();
  Var pre = add(add_row(matmul(x, w.U), w.b), matmul(st.h, w.W));
  Var ifo = sigmoid(concat_cols(std::vector<Var>{slice_cols(pre, 0, 2 * H),
                                                 slice_cols(pre, 3 * H, H)}));
  Var i = slice_cols(ifo, 0, H);
  Var f = slice_cols(ifo, H, H);
  Var o = slice_cols(ifo, 2 * H, H);
  Var g = tanh(slice_cols(pre, 2 * H, H));
  Var c = add(mul(f, st.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

LstmState lstm_step(const Var& x, const LstmState& state,
                    const ParameterSet& params, const std::string& prefix) {
  return lstm_step(x, state, cell_weights(params, prefix));
}

void init_cell(ParameterSet& params, const std::string& prefix, CellKind kind,
               std::size_t input, std::size_t hidden, Rng& rng) {
  const std::size_t g = gate_count(kind) * hidden;
  const double a = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto uniform = [&](std::size_t r, std::size_t c) {
    Tensor t = Tensor::matrix(r, c);
    for (auto& v : t.values()) v = rng.uniform(-a, a);
    return t;
  };
  params.add(prefix + ".U", uniform(input, g));
  params.add(prefix + ".W", uniform(hidden, g));
  params.add(prefix + ".b", Tensor::matrix(1, g));
}

CellWeights cell_weights(const ParameterSet& params, const std::string& prefix) {
  return {params.get(prefix + ".U"), params.get(prefix + ".W"),
          params.get(prefix + ".b")};
}

RecurrentStack::RecurrentStack(RecurrentCellConfig cfg, std::string prefix)
    : cfg_(cfg), prefix_(std::move(prefix)) {
  cfg_.validate();
}

std::string RecurrentStack::layer_prefix(std::size_t l) const {
  return prefix_ + ".l" + std::to_string(l);
}

void RecurrentStack::init(ParameterSet& params, Rng& rng) const {
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    init_cell(params, layer_prefix(l), cfg_.kind,
              l == 0 ? cfg_.input_size : cfg_.hidden_size, cfg_.hidden_size, rng);
  }
}

RecurrentState RecurrentStack::zero_state(std::size_t batch) const {
  RecurrentState s;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    s.h.push_back(Var::constant(Tensor::matrix(batch, cfg_.hidden_size)));
    if (cfg_.kind == CellKind::LSTM) {
      s.c.push_back(Var::constant(Tensor::matrix(batch, cfg_.hidden_size)));
    }
  }
  return s;
}

RecurrentState RecurrentStack::step(const ParameterSet& params, const Var& x,
                                    const RecurrentState& prev) const {
  if (prev.h.size() != cfg_.layers) {
    throw DimensionError("recurrent state has the wrong layer count");
  }
  RecurrentState next;
  Var input = x;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const CellWeights w = cell_weights(params, layer_prefix(l));
    if (cfg_.kind == CellKind::GRU) {
      next.h.push_back(gru_step(input, prev.h[l], w));
    } else {
      LstmState st = lstm_step(input, {prev.h[l], prev.c[l]}, w);
      next.h.push_back(st.h);
      next.c.push_back(st.c);
    }
    input = next.h.back();
  }
  return next;
}

RecurrentState RecurrentStack::gather(const RecurrentState& s,
                                      std::span<const std::size_t> idx) {
  RecurrentState out;
  for (const Var& v : s.h) out.h.push_back(gather_rows(v, idx));
  for (const Var& v : s.c) out.c.push_back(gather_rows(v, idx));
  return out;
}

}  // namespace trajlab::nd
