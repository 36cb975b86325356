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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "trajlab/common/errors.hpp"
#include "trajlab/demandgen/demand.hpp"
#include "trajlab/models/maxent.hpp"
#include "trajlab/models/model.hpp"
#include "trajlab/models/rnn.hpp"
#include "trajlab/models/transition.hpp"
#include "trajlab/roadnet/network.hpp"

using namespace trajlab;
using namespace trajlab::models;
using demandgen::Trajectory;
using demandgen::TrajectoryDataset;

namespace {

Trajectory traj(std::vector<std::int32_t> path, bool complete = true) {
  Trajectory t;
  t.path = std::move(path);
  t.complete = complete;
  return t;
}

TrajectoryDataset repeat(const std::vector<std::pair<std::vector<std::int32_t>, int>>& spec) {
  TrajectoryDataset ds;
  for (const auto& [p, k] : spec) {
    for (int i = 0; i < k; ++i) {
      ds.push_back(traj(p));
      ds.back().id = static_cast<std::int64_t>(ds.size() - 1);
    }
  }
  return ds;
}

TrajectoryDataset single_od(const roadnet::RoadNetwork& net, demandgen::RouteChoiceKind kind,
                            std::size_t n, std::uint64_t seed) {
  demandgen::RouteChoiceModel m;
  m.kind = kind;
  demandgen::GeneratorConfig g;
  g.n = n;
  g.seed = seed;
  return demandgen::generate_dataset(net, demandgen::make_pattern(net, demandgen::PatternKind::SingleOD),
                                     m, g);
}

NetConfig small_net(bool attention = false) {
  NetConfig c;
  c.hidden = 16;
  c.layers = 1;
  c.attention = attention;
  return c;
}

// Walks every prefix up to `depth` decisions and checks that masked slots
// carry exactly zero mass and rows are distributions.
std::size_t check_masks(PrefixModel& m, std::size_t depth) {
  const Domain& d = m.domain();
  std::size_t checked = 0;
  std::vector<std::size_t> frontier{m.root(0)};
  {
    const auto p = m.distribution(frontier[0]);
    REQUIRE(p.size() == d.num_origins());
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<std::size_t> next;
    for (std::size_t s = 0; s < p.size(); ++s) next.push_back(m.child(frontier[0], d.origin_location(s)));
    frontier = next;
  }
  for (std::size_t level = 0; level < depth && !frontier.empty(); ++level) {
    std::vector<std::size_t> next;
    for (auto h : frontier) {
      const ObservationId loc = m.token(h);
      const std::vector<double> p(m.distribution(h).begin(), m.distribution(h).end());
      REQUIRE(p.size() == d.num_slots());
      double sum = 0.0;
      for (std::size_t s = 0; s < p.size(); ++s) {
        sum += p[s];
        if (!d.allowed(loc, s)) CHECK(p[s] == 0.0);
        ++checked;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      for (std::size_t s = 0; s < p.size(); ++s) {
        const ObservationId to = d.next(loc, s);
        if (to != kNone && to != kEnd) next.push_back(m.child(h, to));
      }
    }
    frontier = std::move(next);
  }
  return checked;
}

bool admissible_prefixes(const Domain& d, const TrajectoryDataset& ds) {
  for (const auto& t : ds) {
    if (!d.accepts(t)) return false;
  }
  return true;
}

// Greedy argmax walk from the root.
std::vector<std::int32_t> argmax_route(PrefixModel& m, std::size_t max_len, double* min_p) {
  const Domain& d = m.domain();
  std::size_t h = m.root(0);
  auto p = m.distribution(h);
  auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  *min_p = p[best];
  std::vector<std::int32_t> out{d.origin_location(best)};
  h = m.child(h, out.back());
  while (out.size() < max_len) {
    p = m.distribution(h);
    best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    *min_p = std::min(*min_p, p[best]);
    const ObservationId to = d.next(out.back(), best);
    if (to == kEnd) break;
    out.push_back(to);
    h = m.child(h, to);
  }
  return out;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("transition fit reproduces empirical frequencies") {
    const Domain d = Domain::cells(4);
    SUBCASE("A always followed by B") {
      const auto m = TransitionMatrix::fit(d, repeat({{{0, 1}, 5}}));
      CHECK(m.probability(0, 1) == 1.0);
      CHECK(m.probability(kStart, 0) == 1.0);
      CHECK(m.probability(1, kEnd) == 1.0);
    }
    SUBCASE("three to one split") {
      const auto m = TransitionMatrix::fit(d, repeat({{{0, 1}, 3}, {{0, 2}, 1}}));
      CHECK(m.probability(0, 1) == 0.75);
      CHECK(m.probability(0, 2) == 0.25);
      CHECK(m.count(0, 1) == 3.0);
    }
  }

  TEST_CASE("transition rows are exact count ratios and sum to one") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 500, 3);
    const auto m = TransitionMatrix::fit(d, ds);
    std::map<std::pair<int, int>, double> counts;
    std::map<int, double> rows;
    for (const auto& t : ds) {
      int prev = kStart;
      for (auto l : t.path) {
        counts[{prev, l}] += 1;
        rows[prev] += 1;
        prev = l;
      }
      counts[{prev, kEnd}] += 1;
      rows[prev] += 1;
    }
    for (const auto& [k, c] : counts) CHECK(m.probability(k.first, k.second) == c / rows[k.first]);
    const auto& P = m.probabilities();
    for (std::size_t r = 0; r < P.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < P.cols(); ++c) s += P.at(r, c);
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("unseen rows fall back to admissible moves") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Fixed, 10, 1);
    const auto m = TransitionMatrix::fit(d, ds);
    CHECK(m.num_unseen() > 0);
    TransitionSession s(m);
    CHECK(check_masks(s, 6) > 0);
  }

  TEST_CASE("deterministic transitions give identical samples") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Fixed, 50, 1);
    const auto m = TransitionMatrix::fit(d, ds);
    TransitionSession s(m);
    RolloutConfig rc;
    rc.n = 200;
    rc.seed = 9;
    const auto gen = rollout_sample(s, rc);
    REQUIRE(gen.size() == 200);
    for (const auto& t : gen) {
      CHECK(t.path == ds.front().path);
      CHECK(t.complete);
    }
  }

  TEST_CASE("MMC sampling frequencies track the fitted matrix") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 2000, 5);
    const auto m = TransitionMatrix::fit(d, ds);
    TransitionSession s(m);
    RolloutConfig rc;
    rc.n = 12000;
    rc.seed = 2;
    const auto gen = rollout_sample(s, rc);
    std::map<std::pair<int, int>, double> counts;
    std::map<int, double> rows;
    std::size_t transitions = 0;
    for (const auto& t : gen) {
      for (std::size_t i = 1; i < t.path.size(); ++i) {
        counts[{t.path[i - 1], t.path[i]}] += 1;
        rows[t.path[i - 1]] += 1;
        ++transitions;
      }
    }
    REQUIRE(transitions >= 50000);
    for (const auto& [k, c] : counts) {
      CHECK(std::abs(c / rows[k.first] - m.probability(k.first, k.second)) <= 0.02);
    }
  }

  TEST_CASE("rollout respects max_len and flags truncation") {
    const Domain d = Domain::cells(3);
    const auto m = TransitionMatrix::fit(d, repeat({{{0, 1, 0, 1, 0, 1, 0, 1, 2}, 1}}));
    TransitionSession s(m);
    RolloutConfig rc;
    rc.n = 50;
    rc.max_len = 4;
    rc.seed = 1;
    const auto gen = rollout_sample(s, rc);
    for (const auto& t : gen) {
      CHECK(t.path.size() <= 4);
      if (t.path.size() == 4) CHECK_FALSE(t.complete);
    }
    CHECK(admissible_prefixes(d, gen));
    CHECK(rollout_sample(s, rc) == gen);
  }

  TEST_CASE("RNN at zeroed heads scores ln(#admissible) per decision") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 40, 2);
    auto policy = SequencePolicy::create(d, small_net(), 4);
    for (const char* n : {"policy.out.W", "policy.out.b", "policy.start.W", "policy.start.b"}) {
      nd::Var v = policy.params.get(n);
      v.mutable_value().fill(0.0);
    }
    double total = 0.0, decisions = 0.0;
    for (const auto& t : ds) {
      total += std::log(static_cast<double>(d.num_origins()));
      decisions += 1;
      for (auto l : t.path) {
        std::size_t k = 0;
        for (std::size_t s = 0; s < d.num_slots(); ++s) k += d.allowed(l, s);
        total += std::log(static_cast<double>(k));
        decisions += 1;
      }
    }
    CHECK(std::abs(policy_cross_entropy(policy, ds) - total / decisions) < 1e-12);
  }

  TEST_CASE("RNN memorises a single route") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Fixed, 100, 1);
    auto policy = SequencePolicy::create(d, small_net(), 7);
    RnnTrainConfig rc;
    rc.epochs = 60;
    rc.batch_size = 50;
    rc.lr = 1e-2;
    const auto hist = rnn_train(policy, ds, rc);
    CHECK(hist.epoch_loss.back() < hist.epoch_loss.front());
    PolicySampler sampler(policy, {}, 1);
    double min_p = 0.0;
    const auto route = argmax_route(sampler.session(), 50, &min_p);
    CHECK(route == ds.front().path);
    CHECK(min_p > 0.99);
  }

  TEST_CASE("RNN learns an even split at a junction") {
    const Domain d = Domain::cells(4);
    const auto ds = repeat({{{0, 1, 2}, 200}, {{0, 1, 3}, 200}});
    auto policy = SequencePolicy::create(d, small_net(), 3);
    RnnTrainConfig rc;
    rc.epochs = 40;
    rc.batch_size = 100;
    rc.lr = 1e-2;
    rnn_train(policy, ds, rc);
    PolicySampler sampler(policy, {}, 1);
    auto& s = sampler.session();
    const std::vector<std::int32_t> prefix{0, 1};
    const std::size_t h = walk_prefix(s, prefix);
    CHECK(s.transition_probability(h, 2) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(s.transition_probability(h, 3) == doctest::Approx(0.5).epsilon(0.1));
  }

  TEST_CASE("network sessions never put mass on masked slots") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    for (bool attention : {false, true}) {
      auto policy = SequencePolicy::create(d, small_net(attention), 11);
      if (attention) {
        policy.contexts = TrafficContexts(std::vector<nd::Tensor>{
            nd::Tensor::matrix(d.num_locations(), policy.net.config().ts_bins)});
      }
      PolicySampler sampler(policy, attention ? std::vector<double>{0.0} : std::vector<double>{}, 1);
      CHECK(check_masks(sampler.session(), 4) > 0);
    }
  }

  TEST_CASE("belief states do not depend on query order or workers") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    auto policy = SequencePolicy::create(d, small_net(), 5);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 30, 8);
    auto probe = [&](std::size_t workers, bool reverse) {
      NetSession s(policy.net, policy.params, nullptr, workers);
      std::vector<std::vector<double>> out(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t k = reverse ? ds.size() - 1 - i : i;
        const auto p = s.distribution(walk_prefix(s, ds[k].path));
        out[k].assign(p.begin(), p.end());
      }
      return out;
    };
    const auto a = probe(1, false);
    CHECK(a == probe(1, true));
    CHECK(a == probe(4, false));
  }

  TEST_CASE("sampling is identical across worker counts") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    auto policy = SequencePolicy::create(d, small_net(), 5);
    RolloutConfig rc;
    rc.n = 200;
    rc.max_len = 30;
    rc.seed = 3;
    const auto one = sample_policy(policy, rc, {}, 1);
    CHECK(one == sample_policy(policy, rc, {}, 4));
    CHECK(admissible_prefixes(d, one));
  }

  TEST_CASE("attention weights are distributions; zero state is uniform") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    const NetConfig cfg = small_net(true);
    SequenceNet sn(d, cfg, "p");
    nd::ParameterSet params;
    Rng rng(1);
    sn.init(params, rng);
    const std::size_t N = d.num_locations();
    ContextBank bank;
    bank.num_contexts = 2;
    bank.num_locations = N;
    bank.bins = cfg.ts_bins;
    bank.states = nd::Tensor::matrix(2 * N, cfg.ts_bins);
    Rng fill(2);
    for (std::size_t r = N; r < 2 * N; ++r) {
      for (std::size_t c = 0; c < cfg.ts_bins; ++c) bank.states.at(r, c) = fill.uniform();
    }
    const std::vector<std::uint32_t> ctx{0, 1};
    const auto attn = sn.attention_inputs(params, &bank);
    const auto s0 = sn.initial_state(params, ctx, &bank);
    const std::vector<std::size_t> rows{d.token_index(kStart), d.token_index(kStart)};
    nd::Tensor w;
    const auto s1 = sn.advance(params, s0, rows, ctx, attn, &w);
    REQUIRE(w.rows() == 2);
    REQUIRE(w.cols() == N);
    for (std::size_t b = 0; b < 2; ++b) {
      double sum = 0.0;
      for (std::size_t j = 0; j < N; ++j) sum += w.at(b, j);
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    for (std::size_t j = 0; j < N; ++j) CHECK(std::abs(w.at(0, j) - 1.0 / N) < 1e-12);
    (void)s1;
    const auto ctx0 = nd::additive_attention(
        nd::Var::constant(nd::Tensor::matrix(1, cfg.attn_dim)), attn.keys, attn.values,
        params.get("p.att.v"), std::vector<std::size_t>{0}, N);
    for (double v : ctx0.context.value().values()) CHECK(v == 0.0);
  }

  TEST_CASE("MaxEnt single route is the argmax rollout") {
    const auto net = roadnet::build_grid(4, 4);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Fixed, 20, 1);
    for (MaxEntMode mode : {MaxEntMode::SVF, MaxEntMode::SAVF}) {
      MaxEntConfig cfg;
      cfg.mode = mode;
      cfg.iters = 100;
      cfg.lr = 0.5;
      const auto m = maxent_train(d, ds, cfg);
      MaxEntSession s(m);
      double min_p = 0.0;
      CHECK(argmax_route(s, 40, &min_p) == ds.front().path);
      CHECK(check_masks(s, 5) > 0);
    }
  }

  TEST_CASE("MaxEnt matches visitation at the optimum") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 400, 4);
    MaxEntConfig cfg;
    cfg.iters = 3000;
    cfg.lr = 0.5;
    cfg.tolerance = 1e-3;
    MaxEntHistory hist;
    const auto m = maxent_train(d, ds, cfg, &hist);
    CHECK(hist.converged);
    const auto emp = m.empirical_features(ds);
    const auto exp = m.expected_features();
    double gap = 0.0;
    for (std::size_t k = 0; k < emp.size(); ++k) gap = std::max(gap, std::abs(emp[k] - exp[k]));
    CHECK(gap < 0.01);
  }

  TEST_CASE("constant reward shift leaves the MaxEnt policy unchanged") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    const std::size_t N = d.num_locations();
    Rng rng(6);
    for (MaxEntMode mode : {MaxEntMode::SVF, MaxEntMode::SAVF}) {
      const std::size_t nf = mode == MaxEntMode::SVF ? N + 1 : (N + 1) * d.num_slots();
      std::vector<double> w(nf), shifted(nf);
      for (std::size_t k = 0; k < nf; ++k) {
        w[k] = rng.uniform() - 0.5;
        shifted[k] = w[k] + 3.0;
      }
      std::vector<double> origin(d.num_origins(), 1.0 / static_cast<double>(d.num_origins()));
      const MaxEntModel a(d, mode, 12, w, origin), b(d, mode, 12, shifted, origin);
      double diff = 0.0;
      for (std::size_t t = 0; t + 1 < 12; ++t) {
        for (std::size_t l = 0; l < N; ++l) {
          const auto pa = a.policy(t, static_cast<ObservationId>(l));
          const auto pb = b.policy(t, static_cast<ObservationId>(l));
          for (std::size_t s = 0; s < pa.size(); ++s) diff = std::max(diff, std::abs(pa[s] - pb[s]));
        }
      }
      CHECK(diff < 1e-9);
    }
  }

  TEST_CASE("MaxEnt rejects a malformed weight vector") {
    const Domain d = Domain::links(roadnet::build_grid(2, 2));
    std::vector<double> origin(d.num_origins(), 0.0);
    CHECK_THROWS_AS(MaxEntModel(d, MaxEntMode::SVF, 10, {1.0}, origin), DimensionError);
    CHECK_THROWS_AS(MaxEntModel(d, MaxEntMode::SVF, 2, std::vector<double>(d.num_locations() + 1),
                                origin),
                    ContractError);
  }

  TEST_CASE("saved models reload with identical distributions") {
    const auto net = roadnet::build_grid(3, 3);
    const Domain d = Domain::links(net);
    const auto ds = single_od(net, demandgen::RouteChoiceKind::Logit, 60, 2);
    const auto dir = std::filesystem::temp_directory_path() / "trajlab_models_roundtrip";
    std::vector<TrainedModel> ms;
    {
      TrainedModel m;
      m.kind = ModelKind::MMC;
      m.model = TransitionMatrix::fit(d, ds);
      ms.push_back(std::move(m));
    }
    {
      TrainedModel m;
      m.kind = ModelKind::RNN;
      m.seed = 4;
      m.model = SequencePolicy::create(d, small_net(), 4);
      ms.push_back(std::move(m));
    }
    {
      TrainedModel m;
      m.kind = ModelKind::SAVF;
      MaxEntConfig cfg;
      cfg.mode = MaxEntMode::SAVF;
      cfg.iters = 5;
      m.model = maxent_train(d, ds, cfg);
      ms.push_back(std::move(m));
    }
    {
      TrainedModel m;
      m.kind = ModelKind::TrajGAIL;
      m.model = TrajGailBundle::create(d, small_net(), 0.9, 0.02, 3);
      ms.push_back(std::move(m));
    }
    RolloutConfig rc;
    rc.n = 100;
    rc.max_len = 20;
    rc.seed = 5;
    for (const auto& m : ms) {
      CAPTURE(to_string(m.kind));
      std::filesystem::remove_all(dir);
      save_model(dir, m, "h1");
      const TrainedModel back = load_model(dir, d, "h1");
      CHECK(back.kind == m.kind);
      ModelRunner ra(m), rb(back);
      CHECK(ra.sample(rc) == rb.sample(rc));
      CHECK_THROWS(load_model(dir, d, "other-hash"));
    }
    std::filesystem::remove_all(dir);
  }
}
