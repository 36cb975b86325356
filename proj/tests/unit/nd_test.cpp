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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "trajlab/common/errors.hpp"
#include "trajlab/common/random.hpp"
#include "trajlab/nd/gradcheck.hpp"
#include "trajlab/nd/ops.hpp"
#include "trajlab/nd/parameters.hpp"
#include "trajlab/nd/recurrent.hpp"

using namespace trajlab;
using namespace trajlab::nd;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double a = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.values()) v = rng.uniform(-a, a);
  return t;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// x[B x I] times column block [c0, c0 + H) of M[I x G].
double dot_col(const Tensor& x, std::size_t row, const Tensor& M, std::size_t col) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.cols(); ++i) s += x.at(row, i) * M.at(i, col);
  return s;
}

}  // namespace

TEST_SUITE("nd") {

TEST_CASE("gru with zero weights and inputs stays at zero") {
  const std::size_t H = 4;
  CellWeights w{Var::constant(Tensor::matrix(3, 3 * H)), Var::constant(Tensor::matrix(H, 3 * H)),
                Var::constant(Tensor::matrix(1, 3 * H))};
  Var s = gru_step(Var::constant(Tensor::matrix(2, 3)), Var::constant(Tensor::matrix(2, H)), w);
  for (double v : s.value().values()) CHECK(v == 0.0);
}

TEST_CASE("gru with saturated update gate copies the previous state") {
  Rng rng(3);
  const std::size_t H = 4;
  Tensor b = Tensor::matrix(1, 3 * H);
  for (std::size_t j = 0; j < H; ++j) b.at(0, j) = 60.0;  // z block
  CellWeights w{Var::constant(random_matrix(3, 3 * H, rng)), Var::constant(random_matrix(H, 3 * H, rng)),
                Var::constant(b)};
  Tensor prev = random_matrix(2, H, rng);
  Var s = gru_step(Var::constant(random_matrix(2, 3, rng)), Var::constant(prev), w);
  for (std::size_t i = 0; i < prev.size(); ++i) CHECK(s.value()[i] == doctest::Approx(prev[i]).epsilon(1e-15));
}

TEST_CASE("gru matches a scalar-loop oracle") {
  Rng rng(11);
  const std::size_t B = 2, I = 3, H = 4;
  Tensor U = random_matrix(I, 3 * H, rng), W = random_matrix(H, 3 * H, rng), b = random_matrix(1, 3 * H, rng);
  Tensor x = random_matrix(B, I, rng), s = random_matrix(B, H, rng);
  Var out = gru_step(Var::constant(x), Var::constant(s),
                     CellWeights{Var::constant(U), Var::constant(W), Var::constant(b)});
  for (std::size_t n = 0; n < B; ++n) {
    std::vector<double> z(H), r(H);
    for (std::size_t j = 0; j < H; ++j) {
      z[j] = sig(dot_col(x, n, U, j) + dot_col(s, n, W, j) + b.at(0, j));
      r[j] = sig(dot_col(x, n, U, H + j) + dot_col(s, n, W, H + j) + b.at(0, H + j));
    }
    for (std::size_t j = 0; j < H; ++j) {
      double rs = 0.0;
      for (std::size_t k = 0; k < H; ++k) rs += r[k] * s.at(n, k) * W.at(k, 2 * H + j);
      const double h = std::tanh(dot_col(x, n, U, 2 * H + j) + rs + b.at(0, 2 * H + j));
      const double expect = (1.0 - z[j]) * h + z[j] * s.at(n, j);
      CHECK(std::abs(out.value().at(n, j) - expect) < 1e-12);
    }
  }
}

TEST_CASE("lstm with zero weights and state gives zero") {
  const std::size_t H = 3;
  CellWeights w{Var::constant(Tensor::matrix(2, 4 * H)), Var::constant(Tensor::matrix(H, 4 * H)),
                Var::constant(Tensor::matrix(1, 4 * H))};
  LstmState st = lstm_step(Var::constant(Tensor::matrix(2, 2)),
                           {Var::constant(Tensor::matrix(2, H)), Var::constant(Tensor::matrix(2, H))}, w);
  for (double v : st.h.value().values()) CHECK(v == 0.0);
  for (double v : st.c.value().values()) CHECK(v == 0.0);
}

TEST_CASE("lstm with open forget and closed input gate carries the cell") {
  Rng rng(5);
  const std::size_t H = 3;
  Tensor b = Tensor::matrix(1, 4 * H);
  for (std::size_t j = 0; j < H; ++j) {
    b.at(0, j) = -60.0;     // input gate
    b.at(0, H + j) = 60.0;  // forget gate
  }
  Tensor c = random_matrix(2, H, rng);
  LstmState st = lstm_step(Var::constant(random_matrix(2, 2, rng)),
                           {Var::constant(random_matrix(2, H, rng)), Var::constant(c)},
                           CellWeights{Var::constant(random_matrix(2, 4 * H, rng)),
                                       Var::constant(random_matrix(H, 4 * H, rng)), Var::constant(b)});
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(st.c.value()[i] == doctest::Approx(c[i]).epsilon(1e-15));
}

TEST_CASE("lstm matches a scalar-loop oracle") {
  Rng rng(17);
  const std::size_t B = 2, I = 3, H = 4;
  Tensor U = random_matrix(I, 4 * H, rng), W = random_matrix(H, 4 * H, rng), b = random_matrix(1, 4 * H, rng);
  Tensor x = random_matrix(B, I, rng), h = random_matrix(B, H, rng), c = random_matrix(B, H, rng);
  LstmState st = lstm_step(Var::constant(x), {Var::constant(h), Var::constant(c)},
                           CellWeights{Var::constant(U), Var::constant(W), Var::constant(b)});
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t j = 0; j < H; ++j) {
      auto pre = [&](std::size_t gate) {
        const std::size_t col = gate * H + j;
        return dot_col(x, n, U, col) + dot_col(h, n, W, col) + b.at(0, col);
      };
      const double ig = sig(pre(0)), fg = sig(pre(1)), g = std::tanh(pre(2)), og = sig(pre(3));
      const double cn = fg * c.at(n, j) + ig * g;
      CHECK(std::abs(st.c.value().at(n, j) - cn) < 1e-12);
      CHECK(std::abs(st.h.value().at(n, j) - og * std::tanh(cn)) < 1e-12);
    }
  }
}

TEST_CASE("cross-entropy of uniform logits is ln K") {
  Var logits = Var::constant(Tensor::matrix(3, 4, 0.7));
  std::vector<std::size_t> labels{0, 2, 3};
  CHECK(softmax_cross_entropy(logits, labels).item() == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("cross-entropy of a dominant true logit is near zero") {
  Tensor t = Tensor::matrix(1, 4);
  t.at(0, 1) = 100.0;
  std::vector<std::size_t> labels{1};
  CHECK(softmax_cross_entropy(Var::constant(t), labels).item() < 1e-40);
}

TEST_CASE("cross-entropy matches a log-sum-exp oracle") {
  Rng rng(23);
  Tensor t = random_matrix(3, 5, rng, 4.0);
  std::vector<std::size_t> labels{4, 0, 2};
  double expect = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double mx = t.at(i, 0);
    for (std::size_t j = 1; j < 5; ++j) mx = std::max(mx, t.at(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < 5; ++j) s += std::exp(t.at(i, j) - mx);
    expect += (mx + std::log(s) - t.at(i, labels[i])) / 3.0;
  }
  CHECK(std::abs(softmax_cross_entropy(Var::constant(t), labels).item() - expect) < 1e-10);
}

TEST_CASE("masked label is a contract error") {
  Mask m(1, 3, true);
  m.set(0, 2, false);
  std::vector<std::size_t> labels{2};
  CHECK_THROWS_AS(softmax_cross_entropy(Var::constant(Tensor::matrix(1, 3)), labels, &m), ContractError);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  ParameterSet ps;
  ps.add("w", Tensor::row({0.5, -0.25}));
  Var loss = weighted_sum(ps.get("w"), Tensor::row({0.0, 0.0}));
  backward(loss);
  adam_step(ps, AdamConfig{});
  CHECK(ps.get("w").value()[0] == 0.5);
  CHECK(ps.get("w").value()[1] == -0.25);
  CHECK(ps.step() == 1);
}

TEST_CASE("adam first step with unit gradient moves by lr") {
  ParameterSet ps;
  ps.add("w", Tensor::scalar(2.0));
  backward(sum(ps.get("w")));
  AdamConfig cfg;
  cfg.lr = 0.1;
  adam_step(ps, cfg);
  // m_hat = v_hat = 1 after bias correction
  CHECK(ps.get("w").value().item() - 2.0 == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam with constant gradient moves monotonically against its sign") {
  ParameterSet ps;
  ps.add("w", Tensor::scalar(0.0));
  double prev = 0.0;
  for (int i = 0; i < 50; ++i) {
    backward(affine(sum(ps.get("w")), -3.0));  // gradient -3
    adam_step(ps, AdamConfig{});
    const double now = ps.get("w").value().item();
    CHECK(now > prev);
    prev = now;
  }
}

TEST_CASE("adam refuses parameters without a gradient") {
  ParameterSet ps;
  ps.add("a", Tensor::scalar(1.0));
  ps.add("b", Tensor::scalar(1.0));
  backward(sum(ps.get("a")));
  CHECK_THROWS_AS(adam_step(ps, AdamConfig{}), ContractError);
}

TEST_CASE("gradient check of a plain sum") {
  ParameterSet ps;
  Rng rng(1);
  ps.add("w", random_matrix(3, 2, rng));
  CHECK(gradient_check([&] { return sum(ps.get("w")); }, ps) < 1e-10);
}

TEST_CASE("gradient check of a GRU and an LSTM rollout with cross-entropy") {
  for (CellKind kind : {CellKind::GRU, CellKind::LSTM}) {
    CAPTURE(to_string(kind));
    Rng rng(31);
    RecurrentCellConfig cfg;
    cfg.kind = kind;
    cfg.input_size = 3;
    cfg.hidden_size = 4;
    cfg.layers = 2;
    RecurrentStack stack(cfg, "rnn");
    ParameterSet ps;
    stack.init(ps, rng);
    ps.add("head", random_matrix(4, 5, rng));
    std::vector<Tensor> xs;
    for (int t = 0; t < 5; ++t) xs.push_back(random_matrix(2, 3, rng));
    const std::vector<std::size_t> labels{1, 4};
    auto f = [&] {
      RecurrentState s = stack.zero_state(2);
      Var loss;
      for (const auto& x : xs) {
        s = stack.step(ps, Var::constant(x), s);
        Var l = softmax_cross_entropy(matmul(RecurrentStack::top(s), ps.get("head")), labels);
        loss = loss.defined() ? add(loss, l) : l;
      }
      return loss;
    };
    CHECK(gradient_check(f, ps, 1e-5) < 1e-4);
  }
}

TEST_CASE("gradient check of weighted binary cross-entropy") {
  Rng rng(41);
  ParameterSet ps;
  ps.add("w", random_matrix(3, 4, rng));
  Tensor x = random_matrix(6, 3, rng), y = Tensor::matrix(6, 4), w = Tensor::matrix(6, 4);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    w[i] = rng.uniform();
  }
  auto f = [&] { return bce_with_logits(matmul(Var::constant(x), ps.get("w")), y, w); };
  CHECK(gradient_check(f, ps) < 1e-4);
}

TEST_CASE("masked softmax assigns exactly zero to masked entries") {
  Rng rng(2);
  Mask m(2, 4, true);
  m.set(0, 1, false);
  m.set(1, 3, false);
  Var lp = masked_log_softmax(Var::constant(random_matrix(2, 4, rng, 3.0)), m);
  CHECK(std::exp(lp.value().at(0, 1)) == 0.0);
  CHECK(std::exp(lp.value().at(1, 3)) == 0.0);
  double s = 0.0;
  for (std::size_t j = 0; j < 4; ++j) s += std::exp(lp.value().at(0, j));
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("parameter sets round-trip through the binary container") {
  Rng rng(9);
  ParameterSet ps;
  ps.add("a", random_matrix(2, 3, rng));
  ps.add("b.c", random_matrix(1, 5, rng));
  std::stringstream ss;
  ps.write(ss);
  ParameterSet back = ParameterSet::read(ss);
  CHECK(back.same_values(ps));
  CHECK(back.names() == ps.names());
}

}  // TEST_SUITE
