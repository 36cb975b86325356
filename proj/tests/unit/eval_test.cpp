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
#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "trajlab/common/errors.hpp"
#include "trajlab/common/random.hpp"
#include "trajlab/eval/dataset_metrics.hpp"
#include "trajlab/eval/report.hpp"
#include "trajlab/eval/scoring.hpp"
#include "trajlab/eval/sequence_scores.hpp"
#include "trajlab/models/transition.hpp"

using namespace trajlab;
using namespace trajlab::eval;
using demandgen::Trajectory;
using demandgen::TrajectoryDataset;

namespace {

using Seq = std::vector<std::int32_t>;

Seq random_seq(std::mt19937_64& g, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> tok(0, alphabet - 1);
  Seq s(len(g));
  for (auto& x : s) x = tok(g);
  return s;
}

TrajectoryDataset paths(const std::vector<Seq>& ps) {
  TrajectoryDataset ds;
  for (const auto& p : ps) {
    Trajectory t;
    t.id = static_cast<std::int64_t>(ds.size());
    t.path = p;
    ds.push_back(t);
  }
  return ds;
}

std::vector<double> random_distribution(std::mt19937_64& g, std::size_t n, bool zeros) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) {
    v = zeros && u(g) < 0.3 ? 0.0 : u(g);
    s += v;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : p) v /= s;
  return p;
}

models::TransitionMatrix fit_cells(std::size_t n, const std::vector<Seq>& ps) {
  return models::TransitionMatrix::fit(models::Domain::cells(n), paths(ps));
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("BLEU matches the n-gram counting oracle") {
    std::mt19937_64 g(17);
    for (int i = 0; i < 100; ++i) {
      const Seq c = random_seq(g, 12, 5), r = random_seq(g, 12, 5);
      const double got = bleu(c, r);
      CHECK(std::abs(got - oracle::bleu(c, r)) <= 1e-12);
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
    }
    const Seq a{1, 2, 3, 4, 5};
    CHECK(bleu(a, a) == 1.0);
    CHECK(bleu(Seq{1, 2, 3, 4, 5, 3}, a) < 1.0);
    const Seq x{1, 2, 3, 9, 5};
    CHECK(std::abs(bleu(x, a) - oracle::bleu(x, a)) <= 1e-12);
    const auto short_c = bleu_detail(Seq{1, 2}, a);
    CHECK(short_c.flagged);
    CHECK(std::abs(short_c.score - oracle::bleu(Seq{1, 2}, a)) <= 1e-12);
  }

  TEST_CASE("METEOR matches the exhaustive alignment oracle") {
    std::mt19937_64 g(23);
    int exact = 0, drawn = 0;
    while (exact < 100) {
      ++drawn;
      const Seq c = random_seq(g, 12, 7), r = random_seq(g, 12, 7);
      const auto al = meteor_alignment(c, r);
      if (!al.exact) continue;
      ++exact;
      const auto o = oracle::meteor_alignment(c, r);
      CHECK(al.matches == o.matches);
      CHECK(al.crossings == o.crossings);
      CHECK(al.chunks == o.chunks);
      const double got = meteor(c, r);
      CHECK(std::abs(got - oracle::meteor(c, r)) <= 1e-12);
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
    }
    CHECK(drawn < 400);
    CHECK(std::abs(meteor(Seq{1, 2, 3, 4, 5}, Seq{1, 2, 3, 4, 5}) - 0.996) < 1e-12);
    CHECK(meteor(Seq{1, 2, 3}, Seq{4, 5, 6}) == 0.0);
    const Seq fwd{1, 2, 3}, rev{3, 2, 1};
    CHECK(std::abs(meteor(rev, fwd) - oracle::meteor(rev, fwd)) <= 1e-12);
  }

  TEST_CASE("empty candidates score zero") {
    const MetricSpec b{Metric::BLEU, 4}, m{Metric::METEOR, 4};
    CHECK(score_pair(b, Seq{}, Seq{1, 2}) == 0.0);
    CHECK(score_pair(m, Seq{}, Seq{1, 2}) == 0.0);
  }

  TEST_CASE("max-score evaluation matches a brute-force double loop") {
    std::mt19937_64 g(5);
    std::vector<Seq> gen, ref;
    for (int i = 0; i < 50; ++i) gen.push_back(random_seq(g, 8, 6));
    // few distinct references so deduplication has work to do
    std::vector<Seq> pool;
    for (int i = 0; i < 12; ++i) pool.push_back(random_seq(g, 8, 6));
    pool[3] = {5, 1, 4, 2, 0, 3};
    for (int i = 0; i < 50; ++i) ref.push_back(pool[static_cast<std::size_t>(i) % pool.size()]);
    gen[0] = ref[3];
    for (Metric metric : {Metric::BLEU, Metric::METEOR}) {
      const MetricSpec spec{metric, 4};
      const auto got = max_score_eval(paths(gen), paths(ref), spec, 1);
      REQUIRE(got.size() == gen.size());
      for (std::size_t i = 0; i < gen.size(); ++i) {
        double best = 0.0;
        for (const auto& r : ref) best = std::max(best, score_pair(spec, gen[i], r));
        CHECK(got[i] == best);
      }
      if (metric == Metric::BLEU) CHECK(got[0] == 1.0);
      CHECK(max_score_eval(paths(gen), paths(pool), spec, 4) == got);
    }
  }

  TEST_CASE("prediction scoring") {
    SUBCASE("deterministic model scores one for any N") {
      const std::vector<Seq> route{{0, 1, 2, 3, 4, 5, 6}};
      const auto m = fit_cells(7, route);
      models::TransitionSession s(m);
      PredictionConfig cfg;
      cfg.given = 2;
      for (std::size_t n : {1, 7, 100}) {
        cfg.samples = n;
        const auto r = prediction_score_eval(s, paths(route), cfg);
        REQUIRE(r.cases.size() == 1);
        CHECK(r.cases[0].mean_score[0] == 1.0);
        CHECK(r.cases[0].mean_score[1] == doctest::Approx(oracle::meteor({2, 3, 4, 5, 6}, {2, 3, 4, 5, 6})));
        CHECK(r.flagged == 0);
      }
    }
    SUBCASE("N = 1 equals a single continuation scored directly") {
      const std::vector<Seq> data{{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1}};
      const auto m = fit_cells(4, data);
      models::TransitionSession s(m);
      PredictionConfig cfg;
      cfg.given = 1;
      cfg.samples = 1;
      cfg.seed = 3;
      const auto r = prediction_score_eval(s, paths({data[0]}), cfg);
      REQUIRE(r.cases.size() == 1);
      const auto cont = models::sample_continuations(s, std::span<const std::int32_t>(data[0].data(), 1),
                                                     0, 1, cfg.max_len, derive_seed(cfg.seed, 0));
      REQUIRE(cont.size() == 1);
      const Seq truth(data[0].begin() + 1, data[0].end());
      const double want_b = cont[0].complete ? bleu(cont[0].path, truth) : 0.0;
      const double want_m = cont[0].complete ? meteor(cont[0].path, truth) : 0.0;
      CHECK(r.cases[0].mean_score[0] == want_b);
      CHECK(r.cases[0].mean_score[1] == want_m);
    }
    SUBCASE("mean over 100 draws sits near the Bernoulli mixture") {
      const std::vector<Seq> data{{0, 1, 2}, {0, 1, 3}};
      const auto m = fit_cells(4, data);
      models::TransitionSession s(m);
      PredictionConfig cfg;
      cfg.given = 2;
      cfg.samples = 100;
      cfg.seed = 11;
      const auto r = prediction_score_eval(s, paths({data[0]}), cfg);
      REQUIRE(r.cases.size() == 1);
      // METEOR of a matching single element is 0.5, a miss is 0
      const double mean = 0.5 * 0.5, sigma = std::sqrt(0.5 * 0.5 * 0.25 / 100.0);
      CHECK(std::abs(r.cases[0].mean_score[1] - mean) <= 2.0 * sigma);
    }
  }

  TEST_CASE("CPP and its CCDF") {
    SUBCASE("deterministic model on its own route") {
      const std::vector<Seq> route{{0, 1, 2, 3, 4}};
      const auto m = fit_cells(5, route);
      models::TransitionSession s(m);
      for (std::size_t k : {1, 2, 3}) {
        const auto r = cpp_k(s, paths(route), k);
        REQUIRE_FALSE(r.values.empty());
        for (double v : r.values) CHECK(v == 1.0);
        CHECK(r.auc == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
    SUBCASE("even branch gives one half") {
      const std::vector<Seq> data{{0, 1, 2}, {0, 1, 3}};
      const auto m = fit_cells(4, data);
      models::TransitionSession s(m);
      const auto r = cpp_k(s, paths({data[0]}), 1, 2);
      REQUIRE(r.values.size() == 1);
      CHECK(r.values[0] == 0.5);
    }
    SUBCASE("CCDF is monotone and the AUC bounded") {
      std::mt19937_64 g(9);
      for (int i = 0; i < 20; ++i) {
        CppResult r;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int j = 0; j < 50; ++j) r.values.push_back(u(g) * u(g));
        fill_ccdf(r);
        REQUIRE(r.grid.size() == 101);
        for (std::size_t j = 1; j < r.ccdf.size(); ++j) CHECK(r.ccdf[j] <= r.ccdf[j - 1]);
        CHECK(r.auc >= 0.0);
        CHECK(r.auc <= 1.0);
      }
    }
    CHECK_THROWS_AS(
        [] {
          const auto m = fit_cells(2, {{0, 1}});
          models::TransitionSession s(m);
          cpp_k(s, paths({{0, 1}}), 0);
        }(),
        ContractError);
  }

  TEST_CASE("Jensen-Shannon divergence") {
    std::mt19937_64 g(31);
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = 2 + static_cast<std::size_t>(i % 7);
      const auto p = random_distribution(g, n, true), q = random_distribution(g, n, true);
      const double d = js_divergence(p, q);
      CHECK(std::abs(d - oracle::js_divergence(p, q)) <= 1e-12);
      CHECK(d == doctest::Approx(js_divergence(q, p)).epsilon(1e-15));
      CHECK(d >= 0.0);
      CHECK(d <= 1.0 + 1e-15);
      CHECK(std::abs(js_divergence(p, p)) <= 1e-12);
    }
    const std::vector<double> a{0.5, 0.5}, b{1.0, 0.0};
    CHECK(std::abs(js_divergence(a, b) - oracle::js_divergence(a, b)) <= 1e-12);
    CHECK(js_divergence(std::vector<double>{1, 0}, std::vector<double>{0, 1}) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("route JSD over random desk datasets") {
    std::mt19937_64 g(41);
    std::vector<Seq> routes;
    for (int i = 0; i < 8; ++i) routes.push_back({i, i + 10, i + 20});
    for (int inst = 0; inst < 100; ++inst) {
      std::uniform_int_distribution<int> pick(0, 7), size(5, 40);
      TrajectoryDataset real, gen;
      const int nr = size(g), ng = size(g);
      for (int i = 0; i < nr; ++i) real.push_back(paths({routes[static_cast<std::size_t>(pick(g) % 5)]})[0]);
      for (int i = 0; i < ng; ++i) gen.push_back(paths({routes[static_cast<std::size_t>(pick(g))]})[0]);
      if (inst % 4 == 0) gen.back().complete = false;
      // oracle over the real keys plus one pooled unknown bucket
      std::map<std::string, double> pr, pg;
      for (const auto& t : real) pr[demandgen::route_key(t)] += 1.0 / nr;
      double unknown = 0.0;
      std::size_t unknown_count = 0;
      for (const auto& t : gen) {
        const auto k = demandgen::route_key(t);
        if (t.complete && pr.count(k)) {
          pg[k] += 1.0 / ng;
        } else {
          unknown += 1.0 / ng;
          ++unknown_count;
        }
      }
      std::vector<double> p, q;
      for (const auto& [k, v] : pr) {
        p.push_back(pg.count(k) ? pg[k] : 0.0);
        q.push_back(v);
      }
      p.push_back(unknown);
      q.push_back(0.0);
      const auto res = route_jsd(gen, real);
      CHECK(std::abs(res.divergence - oracle::js_divergence(p, q)) <= 1e-12);
      CHECK(std::abs(res.distance - std::sqrt(oracle::js_divergence(p, q))) <= 1e-12);
      CHECK(res.unknown == unknown_count);
    }
    const auto same = paths({{1, 2}, {3, 4}, {1, 2}});
    CHECK(route_jsd(same, same).distance == 0.0);
    CHECK(route_jsd(same, same).unknown == 0);
    CHECK(route_jsd(paths({{7, 8}}), same).distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(route_jsd(TrajectoryDataset{}, same));
  }

  TEST_CASE("transition entropy") {
    std::mt19937_64 g(3);
    for (int i = 0; i < 100; ++i) {
      std::vector<Seq> ps;
      for (int j = 0; j < 6; ++j) ps.push_back(random_seq(g, 8, 5));
      CHECK(std::abs(transition_entropy(paths(ps)) - oracle::transition_entropy(ps)) <= 1e-12);
    }
    CHECK(transition_entropy(paths({{1, 2, 3}, {1, 2, 3}})) == 0.0);
    // every observed link splits evenly over two successors
    const auto even = paths({{0, 1, 3}, {0, 2, 4}, {1, 3}, {1, 4}, {2, 3}, {2, 4}});
    CHECK(transition_entropy(paths({{0, 1}, {0, 2}})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    auto doubled = even;
    doubled.insert(doubled.end(), even.begin(), even.end());
    CHECK(transition_entropy(doubled) == doctest::Approx(transition_entropy(even)).epsilon(1e-15));
  }

  TEST_CASE("complexity sensitivity is ordinary least squares") {
    std::vector<std::pair<double, double>> line;
    for (double x : {0.1, 0.4, 0.7, 1.3}) line.emplace_back(x, 0.3 * x + 0.1);
    const auto f = complexity_sensitivity(line);
    CHECK(std::abs(f.slope - 0.3) <= 1e-12);
    CHECK(std::abs(f.intercept - 0.1) <= 1e-12);
    const std::vector<std::pair<double, double>> two{{1.0, 2.0}, {3.0, 3.0}};
    CHECK(complexity_sensitivity(two).slope == doctest::Approx(0.5).epsilon(1e-15));
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 20; ++i) {
      std::vector<std::pair<double, double>> cloud;
      for (int j = 0; j < 10; ++j) cloud.emplace_back(u(g), u(g));
      const auto got = complexity_sensitivity(cloud);
      const auto [slope, intercept] = oracle::ols(cloud);
      CHECK(std::abs(got.slope - slope) <= 1e-12);
      CHECK(std::abs(got.intercept - intercept) <= 1e-12);
    }
    const std::vector<std::pair<double, double>> flat{{1.0, 2.0}, {1.0, 3.0}};
    CHECK_THROWS_AS(complexity_sensitivity(flat), EvalError);
  }

  TEST_CASE("region metrics") {
    CHECK(revisit_ratio(Seq{0, 1, 2}) == 0.0);
    CHECK(revisit_ratio(Seq{0, 1, 0}) == doctest::Approx(100.0 / 3.0).epsilon(1e-15));
    const auto ds = paths({{0, 1, 0}, {2, 1}, {0, 2, 1, 3}});
    const auto r = region_metrics(ds, 4);
    CHECK(r.visits[0] == doctest::Approx(2.0 / 3.0));
    CHECK(r.visits[1] == 1.0);
    double flow = 0.0;
    for (const auto& [k, v] : r.flows) flow += v * 3.0;
    CHECK(flow == doctest::Approx(2.0 + 1.0 + 3.0));
    CHECK(r.mean_revisit == doctest::Approx(100.0 / 9.0));
    CHECK_THROWS_AS(region_metrics(paths({{9}}), 4), ContractError);
  }

  TEST_CASE("report round trip and markdown") {
    EvalReport rep;
    rep.metadata["seed"] = 3;
    ScenarioEval s;
    s.scenario = "SingleOD-Fixed";
    s.real_entropy = 0.25;
    s.real_size = 10;
    ModelEval a, b, c;
    a.model = "RNN";
    a.d_js = 0.2;
    a.bleu = {0.9, 0.01};
    a.meteor = {0.8, 0.02};
    b.model = "TrajGAIL";
    b.d_js = 0.1;
    b.bleu = {0.95, 0.01};
    b.meteor = {0.7, 0.02};
    CppResult cr;
    cr.values = {0.5, 1.0};
    fill_ccdf(cr);
    b.cpp.push_back(cr);
    b.mean_revisit = 1.5;
    b.prediction[4] = {0.5, 0.6};
    c.model = "SVF";
    c.error = "empty generated set";
    s.models = {a, b, c};
    rep.scenarios.push_back(s);
    const auto j = to_json(rep);
    const auto back = report_from_json(j);
    CHECK(to_json(back) == j);
    const std::string md = render_markdown(rep);
    CHECK(md.find("**0.1000**") != std::string::npos);
    CHECK(md.find("**0.9500**") != std::string::npos);
    CHECK(md.find("**0.8000**") != std::string::npos);
    CHECK(md.find("error") != std::string::npos);
    std::ostringstream csv;
    write_ccdf_csv(csv, rep);
    CHECK(csv.str().find("SingleOD-Fixed,TrajGAIL,1,") != std::string::npos);
  }
}
