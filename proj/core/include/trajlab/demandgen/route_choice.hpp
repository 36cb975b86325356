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

#include <string>
#include <vector>

#include "trajlab/roadnet/network.hpp"

namespace trajlab::demandgen {

enum class RouteChoiceKind { Fixed, Logit, CLogit, Proportional, Binomial };

const char* to_string(RouteChoiceKind k) noexcept;
RouteChoiceKind route_choice_from_string(const std::string& s);

struct RouteChoiceModel {
  RouteChoiceKind kind = RouteChoiceKind::Logit;
  double theta = 1.0;     // logit scale per unit cost
  double alpha = 2.0;     // proportional exponent
  double beta_cf = 1.0;   // C-Logit commonality weight
  double gamma_cf = 1.0;  // C-Logit commonality exponent
  double p = 0.3;         // binomial success probability

  void validate() const;
};

// Cost of a route: its link count (uniform free-flow link cost).
std::vector<double> route_costs(const std::vector<roadnet::Route>& routes);

// Fixed: all mass on the first minimum-cost route.
// Logit: softmax(-theta * cost).
// Proportional: cost^-alpha, normalized.
// CLogit: softmax(-theta * cost - beta_cf * CF), CF_k = ln sum_j
//   (shared_kj / sqrt(len_k len_j))^gamma_cf with lengths in links.
// Binomial: Binomial(K-1, p) pmf evaluated at each route's cost rank
//   (ties broken by list order).
std::vector<double> route_choice_probabilities(const std::vector<roadnet::Route>& routes,
                                               const std::vector<double>& costs,
                                               const RouteChoiceModel& model);

}  // namespace trajlab::demandgen
