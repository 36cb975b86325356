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

#include "trajlab/demandgen/route_choice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "trajlab/common/errors.hpp"

namespace trajlab::demandgen {

const char* to_string(RouteChoiceKind k) noexcept {
  switch (k) {
    case RouteChoiceKind::Fixed: return "Fixed";
    case RouteChoiceKind::Logit: return "Logit";
    case RouteChoiceKind::CLogit: return "CLogit";
    case RouteChoiceKind::Proportional: return "Proportional";
    case RouteChoiceKind::Binomial: return "Binomial";
  }
  return "?";
}

RouteChoiceKind route_choice_from_string(const std::string& s) {
  for (auto k : {RouteChoiceKind::Fixed, RouteChoiceKind::Logit, RouteChoiceKind::CLogit,
                 RouteChoiceKind::Proportional, RouteChoiceKind::Binomial}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown route choice model: " + s);
}

void RouteChoiceModel::validate() const {
  if (!(theta > 0.0) || !(alpha > 0.0) || !(gamma_cf > 0.0) || !(beta_cf >= 0.0)) {
    throw ConfigError("route choice requires theta, alpha, gamma_cf > 0 and beta_cf >= 0");
  }
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("binomial p must lie in (0, 1)");
}

std::vector<double> route_costs(const std::vector<roadnet::Route>& routes) {
  std::vector<double> c;
  c.reserve(routes.size());
  for (const auto& r : routes) c.push_back(static_cast<double>(r.size()));
  return c;
}

namespace {

std::vector<double> softmax_neg(const std::vector<double>& u) {
  const double mx = *std::max_element(u.begin(), u.end());
  std::vector<double> p(u.size());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += p[i] = std::exp(u[i] - mx);
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

std::vector<double> route_choice_probabilities(const std::vector<roadnet::Route>& routes,
                                               const std::vector<double>& costs,
                                               const RouteChoiceModel& m) {
  if (routes.empty()) throw ContractError("route_choice_probabilities: empty route list");
  if (costs.size() != routes.size()) {
    throw ContractError("route_choice_probabilities: one cost per route required");
  }
  for (double c : costs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ContractError("route costs must be positive");
  }
  m.validate();
  const std::size_t K = routes.size();
  std::vector<double> p(K, 0.0);
  switch (m.kind) {
    case RouteChoiceKind::Fixed: {
      const auto it = std::min_element(costs.begin(), costs.end());
      p[static_cast<std::size_t>(it - costs.begin())] = 1.0;
      return p;
    }
    case RouteChoiceKind::Logit: {
      std::vector<double> u(K);
      for (std::size_t k = 0; k < K; ++k) u[k] = -m.theta * costs[k];
      return softmax_neg(u);
    }
    case RouteChoiceKind::CLogit: {
      std::vector<std::unordered_set<roadnet::LinkId>> sets;
      for (const auto& r : routes) sets.emplace_back(r.begin(), r.end());
      std::vector<double> u(K);
      for (std::size_t k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          std::size_t shared = 0;
          for (auto l : routes[k]) shared += sets[j].count(l);
          const double ratio =
              static_cast<double>(shared) /
              std::sqrt(static_cast<double>(routes[k].size() * routes[j].size()));
          acc += std::pow(ratio, m.gamma_cf);
        }
        u[k] = -m.theta * costs[k] - m.beta_cf * std::log(acc);
      }
      return softmax_neg(u);
    }
    case RouteChoiceKind::Proportional: {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += p[k] = std::pow(costs[k], -m.alpha);
      for (double& v : p) v /= s;
      return p;
    }
    case RouteChoiceKind::Binomial: {
      std::vector<std::size_t> order(K);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
      const auto n = static_cast<double>(K - 1);
      double coef = 1.0;  // C(n, r)
      for (std::size_t r = 0; r < K; ++r) {
        const auto rr = static_cast<double>(r);
        if (r > 0) coef *= (n - rr + 1.0) / rr;
        p[order[r]] = coef * std::pow(m.p, rr) * std::pow(1.0 - m.p, n - rr);
      }
      return p;
    }
  }
  throw ContractError("unhandled route choice kind");
}

}  // namespace trajlab::demandgen
