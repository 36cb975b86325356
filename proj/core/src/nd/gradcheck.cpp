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
#include "trajlab/nd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "trajlab/common/errors.hpp"

namespace trajlab::nd {

double gradient_check(const std::function<Var()>& f, std::span<Var> leaves,
                      double h) {
  if (!(h >= 1e-6 && h <= 1e-4)) {
    throw ContractError("gradient_check: step must lie in [1e-6, 1e-4]");
  }
  for (Var& v : leaves) v.node()->zero_grad();
  Var loss = f();
  if (!std::isfinite(loss.item())) throw NumericError("gradient_check: f is not finite");
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(leaves.size());
  for (Var& v : leaves) {
    Node& n = *v.node();
    analytic.push_back(n.grad.empty() ? Tensor(n.value.shape(), 0.0) : n.grad);
  }

  NoGradGuard guard;
  auto eval = [&] {
    const double y = f().item();
    if (!std::isfinite(y)) throw NumericError("gradient_check: f is not finite");
    return y;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    Tensor& x = leaves[k].mutable_value();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      const double up = eval();
      x[i] = saved - h;
      const double down = eval();
      x[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err =
          std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  for (Var& v : leaves) v.node()->zero_grad();
  return worst;
}

double gradient_check(const std::function<Var()>& f, ParameterSet& params,
                      double h) {
  std::vector<Var> leaves;
  for (const auto& name : params.names()) leaves.push_back(params.get(name));
  return gradient_check(f, std::span<Var>(leaves), h);
}

}  // namespace trajlab::nd
