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

#include <functional>
#include <memory>
#include <vector>

#include "trajlab/nd/tensor.hpp"

namespace trajlab::nd {

// One vertex of a reverse-mode computation graph. Children hold shared
// ownership of their parents, so a graph lives exactly as long as the Var
// handles that reach it.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool grad_touched = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and pushes contributions into parents.
  std::function<void(Node& self)> backward_fn;

  Tensor& grad_buffer();
  void accumulate(const Tensor& g);
  void zero_grad();
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(Tensor value) { return Var(std::move(value), false); }
  static Var leaf(Tensor value) { return Var(std::move(value), true); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double item() const { return node_->value.item(); }

  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Back-propagates from a 1x1 root, accumulating into every reachable node
// that requires a gradient.
void backward(const Var& root);

bool grad_enabled() noexcept;

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

// Wraps `value` as the output of an op. The backward closure is kept only
// when recording is enabled and some parent needs a gradient; it receives
// the output node and reaches the inputs through self.parents, which keeps
// the order of `parents`.
Var make_result(Tensor value, std::vector<Var> parents,
                std::function<void(Node&)> backward_fn);

// Gradient buffer of parent i for in-place accumulation, or nullptr when
// that parent does not track gradients.
inline Tensor* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  p.grad_touched = true;
  return &p.grad_buffer();
}

}  // namespace detail

}  // namespace trajlab::nd
