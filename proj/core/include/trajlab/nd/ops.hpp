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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trajlab/nd/autodiff.hpp"

namespace trajlab::nd {

// Row-major boolean matrix marking which entries of a logits matrix are
// admissible.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  Mask() = default;
  Mask(std::size_t r, std::size_t c, bool value = true)
      : rows(r), cols(c), allowed(r * c, value ? 1 : 0) {}
  bool operator()(std::size_t r, std::size_t c) const {
    return allowed[r * cols + c] != 0;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    allowed[r * cols + c] = v ? 1 : 0;
  }
};

// Additive offset applied to masked logits before normalization.
inline constexpr double kMaskedLogit = -1e30;

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// a[MxN] + row[1xN], broadcast over rows.
Var add_row(const Var& a, const Var& row);
// s * a + b elementwise.
Var affine(const Var& a, double s, double b = 0.0);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var square(const Var& a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t begin, std::size_t count);
Var slice_rows(const Var& a, std::size_t begin, std::size_t count);
// out[i] = a[idx[i]]; the backward pass scatter-adds.
Var gather_rows(const Var& a, std::span<const std::size_t> idx);

Var sum(const Var& a);
Var mean(const Var& a);
// sum_ij w_ij * a_ij with a constant weight tensor of the same shape.
Var weighted_sum(const Var& a, const Tensor& w);

// Row-wise log-softmax after adding kMaskedLogit to masked entries, so
// masked probabilities are exactly zero. Every row needs an admissible entry.
Var masked_log_softmax(const Var& logits, const Mask& mask);
// Row entropies [Mx1] of the distributions given by log-probabilities,
// summing over admissible entries only.
Var masked_entropy(const Var& log_probs, const Mask& mask);

// Mean over rows of -log softmax(logits)[label]. A label on a masked entry
// is a ContractError.
Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> labels,
                          const Mask* mask = nullptr);

// sum_i w_i * BCE(sigmoid(x_i), y_i), evaluated stably from logits.
Var bce_with_logits(const Var& logits, const Tensor& targets,
                    const Tensor& weights);

struct AttentionResult {
  Var context;     // [B x V]
  Tensor weights;  // [B x N], rows sum to one
};

// Additive attention. Row b attends over the N rows of its context block
// ctx[b]: score_j = w . tanh(query_b + keys_{ctx[b]*N + j}), weights are the
// softmax of the scores and the context is the weighted sum of values.
AttentionResult additive_attention(const Var& query, const Var& keys,
                                   const Var& values, const Var& w,
                                   std::span<const std::size_t> ctx,
                                   std::size_t n);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

// Plain numeric helpers shared by ops and by gradient-free code paths.
double sigmoid_scalar(double x) noexcept;
double softplus_scalar(double x) noexcept;
double log_sum_exp(std::span<const double> x) noexcept;

}  // namespace trajlab::nd
