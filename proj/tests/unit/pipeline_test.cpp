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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trajlab/common/errors.hpp"
#include "trajlab/pipeline/config.hpp"
#include "trajlab/pipeline/pipeline.hpp"

using namespace trajlab;
using namespace trajlab::pipeline;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trajlab_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string artifact_hash(const json& manifest, const std::string& path) {
  for (const auto& a : manifest.at("artifacts")) {
    if (a.at("path") == path) return a.at("sha256");
  }
  return {};
}

ModelSpec spec_of(models::ModelKind k) {
  ModelSpec m;
  m.kind = k;
  m.net.hidden = 8;
  m.net.layers = 1;
  m.epochs = 2;
  m.batch_size = 50;
  m.iters = 2;
  m.samples = 40;
  m.maxent_iters = 5;
  return m;
}

ExperimentConfig small_run(const fs::path& out, std::size_t n = 200) {
  ExperimentConfig c;
  c.output_dir = out.string();
  c.seed = 4;
  c.demand.n = n;
  c.demand.choice.kind = demandgen::RouteChoiceKind::Fixed;
  c.models = {spec_of(models::ModelKind::MMC)};
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TRAJLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write_file(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("environment sits below every other layer") {
    setenv("TRAJLAB_SEED", "5", 1);
    setenv("TRAJLAB_WORKERS", "3", 1);
    ExperimentConfig c;
    apply_environment(c);
    CHECK(c.seed == 5);
    CHECK(c.workers == 3);
    c = config_from_json(json{{"seed", 7}}, c);
    CHECK(c.seed == 7);
    CHECK(c.workers == 3);
    setenv("TRAJLAB_SEED", "abc", 1);
    ExperimentConfig d;
    CHECK_THROWS_AS(apply_environment(d), ConfigError);
    unsetenv("TRAJLAB_SEED");
    unsetenv("TRAJLAB_WORKERS");
  }

  TEST_CASE("config parsing is strict and round-trips") {
    CHECK_THROWS_AS(config_from_json(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"demand", {{"nn", 1}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"seed", "x"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"models", json::array({{{"kind", "Nope"}}})}}), ConfigError);
    ExperimentConfig c = small_run("x");
    c.models.push_back(spec_of(models::ModelKind::TrajGAIL));
    c.demand.choice.kind = demandgen::RouteChoiceKind::CLogit;
    const json j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
    CHECK_FALSE(to_json(c, true).contains("workers"));
    ExperimentConfig bad = c;
    bad.demand.split_ratio = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.models.push_back(spec_of(models::ModelKind::MMC));
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/trajlab.json"), ConfigError);
  }

  TEST_CASE("default demand splits 14000/6000 and the manifest records it") {
    const auto out = scratch("split");
    ExperimentConfig c = small_run(out, 20000);
    c.eval.generated = 200;
    c.eval.cpp_k = {1};
    run_pipeline(c);
    const json m = read_json(out / "manifest.json");
    CHECK(m.at("status") == "OK");
    CHECK(m.at("split").at("train") == 14000);
    CHECK(m.at("split").at("test") == 6000);
    for (const char* f : {"config.json", "network.json", "dataset.jsonl", "train.jsonl",
                          "test.jsonl", "generated/MMC.jsonl", "report.json", "report.md"}) {
      CAPTURE(f);
      CHECK(artifact_hash(m, f).size() == 64);
    }
    fs::remove_all(out);
  }

  TEST_CASE("Single-OD Fixed MMC run scores BLEU 1 and reruns are identical") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    run_pipeline(small_run(a));
    ExperimentConfig cb = small_run(b);
    cb.workers = 4;
    run_pipeline(cb);
    const json ra = read_json(a / "report.json");
    const auto& mmc = ra.at("scenarios")[0].at("models")[0];
    CHECK(mmc.at("model") == "MMC");
    CHECK(mmc.at("bleu_mean") == 1.0);
    CHECK(mmc.at("d_js") == 0.0);
    const json ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
    for (const char* f : {"dataset.jsonl", "train.jsonl", "test.jsonl", "generated/MMC.jsonl",
                          "report.json", "models/MMC/params.tlab"}) {
      CAPTURE(f);
      CHECK(artifact_hash(ma, f) == artifact_hash(mb, f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("a failing stage leaves a FAILED manifest") {
    const auto out = scratch("failed");
    write_file(out / "generated", "not a directory");
    CHECK_THROWS(run_pipeline(small_run(out)));
    const json m = read_json(out / "manifest.json");
    CHECK(m.at("status") == "FAILED");
    CHECK(m.at("failed_stage") == "sample:MMC");
    CHECK(artifact_hash(m, "dataset.jsonl").size() == 64);
    fs::remove_all(out);
  }

  TEST_CASE("comparison handles self, empty and foreign sets") {
    const auto net = make_network({});
    ExperimentConfig c = small_run("unused", 300);
    c.demand.choice.kind = demandgen::RouteChoiceKind::Logit;
    const auto d = make_demand(net, c);
    const std::vector<GeneratedSet> gens{{"SELF", d.test, "h", nullptr}, {"EMPTY", {}, "h", nullptr}};
    const auto s = compare_models("s", d.test, d.train, "h", gens, c.eval, 1);
    REQUIRE(s.models.size() == 2);
    CHECK(s.models[0].d_js == 0.0);
    CHECK(s.models[0].unknown == 0);
    CHECK_FALSE(s.models[0].error.has_value());
    CHECK(s.models[1].error.has_value());
    const std::vector<GeneratedSet> foreign{{"X", d.test, "other", nullptr}};
    CHECK_THROWS_AS(compare_models("s", d.test, d.train, "h", foreign, c.eval, 1), EvalError);
    CHECK_THROWS_AS(compare_models("s", {}, d.train, "h", gens, c.eval, 1), EvalError);
  }

  TEST_CASE("five-model run writes the full report schema") {
    const auto out = scratch("five");
    ExperimentConfig c = small_run(out, 300);
    c.demand.choice.kind = demandgen::RouteChoiceKind::Logit;
    c.eval.prediction_given = 2;
    c.eval.prediction_samples = 5;
    c.models = {spec_of(models::ModelKind::MMC), spec_of(models::ModelKind::RNN),
                spec_of(models::ModelKind::SVF), spec_of(models::ModelKind::SAVF),
                spec_of(models::ModelKind::TrajGAIL)};
    run_pipeline(c);
    const json r = read_json(out / "report.json");
    const auto& ms = r.at("scenarios")[0].at("models");
    REQUIRE(ms.size() == 5);
    for (const auto& m : ms) {
      CAPTURE(m.at("model").get<std::string>());
      for (const char* k : {"bleu_mean", "bleu_std", "meteor_mean", "meteor_std", "d_js",
                            "unknown", "generated", "cpp", "prediction"}) {
        CHECK(m.contains(k));
      }
      CHECK(m.at("cpp").size() == 3);
      CHECK(m.at("generated") == 90);
      CHECK_FALSE(m.contains("error"));
    }
    CHECK(r.at("scenarios")[0].contains("real_entropy"));
    CHECK(r.at("metadata").at("seed") == 4);
    CHECK(fs::exists(out / "models" / "TrajGAIL" / "training_log.csv"));
    CHECK(fs::exists(out / "ccdf.csv"));
    CHECK(slurp(out / "report.md").find("| Scenario | H(D) |") != std::string::npos);
    fs::remove_all(out);
  }

  TEST_CASE("command line exit codes and precedence") {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    const std::string out = (dir / "o").string();

    CHECK(run_cli("net --out " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "network.json"));
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("net --rows x --out " + out) == 2);

    write_file(dir / "bad.json", R"({"seed": 1, "bogus": true})");
    CHECK(run_cli("net --config " + (dir / "bad.json").string() + " --out " + out) == 2);

    write_file(dir / "file.json", R"({"seed": 9, "network": {"rows": 5}})");
    const std::string file = " --config " + (dir / "file.json").string();
    auto written = [&] { return read_json(fs::path(out) / "config.json"); };
    CHECK(std::system(("TRAJLAB_SEED=5 " + std::string(TRAJLAB_CLI_PATH) + " net --out " + out +
                       " >/dev/null 2>&1")
                          .c_str()) == 0);
    CHECK(written().at("seed") == 5);
    CHECK(run_cli("net --rows 3 --out " + out) == 0);
    CHECK(written().at("network").at("rows") == 3);
    CHECK(run_cli("net --rows 3" + file + " --out " + out) == 0);
    CHECK(written().at("network").at("rows") == 5);
    CHECK(written().at("seed") == 9);
    CHECK(run_cli("net" + file + " --seed 11 --out " + out) == 0);
    CHECK(written().at("seed") == 11);

    CHECK(run_cli("demand --n 100 --out " + out) == 0);
    CHECK(run_cli("eval --out " + out) == 4);
    CHECK(run_cli("report --report " + (dir / "missing.json").string()) == 4);
    CHECK(run_cli("train --model MMC --out " + out) == 0);
    CHECK(run_cli("sample --model MMC --n 20 --out " + out) == 0);
    CHECK(run_cli("eval --out " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "report.md"));
    CHECK(run_cli("report --report " + out + "/report.json") == 0);
    CHECK(run_cli("train --model RNN --hidden 4 --layers 1 --epochs 3 --batch-size 10 --lr 1e308 --out " + out) == 3);
    fs::remove_all(dir);
  }
}
