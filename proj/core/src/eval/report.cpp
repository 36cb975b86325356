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

#include "trajlab/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "trajlab/common/errors.hpp"

namespace trajlab::eval {

using nlohmann::json;

ModelEval evaluate_generated(const std::string& model, const demandgen::TrajectoryDataset& generated,
                             const demandgen::TrajectoryDataset& real,
                             const demandgen::TrajectoryDataset& reference, std::size_t workers) {
  if (generated.empty()) throw EvalError("no generated trajectories for " + model);
  ModelEval e;
  e.model = model;
  e.generated = generated.size();
  for (const auto& t : generated) e.incomplete += !t.complete;
  const auto b = max_score_eval(generated, reference, {Metric::BLEU, 4}, workers);
  const auto m = max_score_eval(generated, reference, {Metric::METEOR, 4}, workers);
  e.bleu = mean_std(b);
  e.meteor = mean_std(m);
  const JsdResult j = route_jsd(generated, real);
  e.d_js = j.distance;
  e.unknown = j.unknown;
  return e;
}

namespace {

json to_json(const CppResult& c) {
  return {{"k", c.k},       {"cases", c.values.size()}, {"values", c.values},
          {"auc", c.auc},   {"grid", c.grid},           {"ccdf", c.ccdf}};
}

CppResult cpp_from_json(const json& j) {
  CppResult c;
  c.k = j.at("k").get<std::size_t>();
  c.auc = j.at("auc").get<double>();
  c.grid = j.at("grid").get<std::vector<double>>();
  c.ccdf = j.at("ccdf").get<std::vector<double>>();
  if (j.contains("values")) c.values = j.at("values").get<std::vector<double>>();
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

json to_json(const EvalReport& r) {
  json out = {{"metadata", r.metadata}, {"scenarios", json::array()}};
  for (const auto& s : r.scenarios) {
    json js = {{"scenario", s.scenario},
               {"real_entropy", s.real_entropy},
               {"real_size", s.real_size},
               {"models", json::array()}};
    for (const auto& m : s.models) {
      json jm = {{"model", m.model},
                 {"bleu_mean", m.bleu.mean},
                 {"bleu_std", m.bleu.std},
                 {"meteor_mean", m.meteor.mean},
                 {"meteor_std", m.meteor.std},
                 {"d_js", m.d_js},
                 {"unknown", m.unknown},
                 {"generated", m.generated},
                 {"incomplete", m.incomplete},
                 {"cpp", json::array()}};
      for (const auto& c : m.cpp) jm["cpp"].push_back(to_json(c));
      if (m.mean_revisit) jm["mean_revisit"] = *m.mean_revisit;
      if (m.error) jm["error"] = *m.error;
      if (!m.prediction.empty()) {
        json jp = json::object();
        for (const auto& [len, v] : m.prediction) jp[std::to_string(len)] = v;
        jm["prediction"] = std::move(jp);
      }
      js["models"].push_back(std::move(jm));
    }
    out["scenarios"].push_back(std::move(js));
  }
  return out;
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.metadata = j.value("metadata", json::object());
    for (const auto& js : j.at("scenarios")) {
      ScenarioEval s;
      s.scenario = js.at("scenario").get<std::string>();
      s.real_entropy = js.at("real_entropy").get<double>();
      s.real_size = js.at("real_size").get<std::size_t>();
      for (const auto& jm : js.at("models")) {
        ModelEval m;
        m.model = jm.at("model").get<std::string>();
        m.bleu = {jm.at("bleu_mean").get<double>(), jm.at("bleu_std").get<double>()};
        m.meteor = {jm.at("meteor_mean").get<double>(), jm.at("meteor_std").get<double>()};
        m.d_js = jm.at("d_js").get<double>();
        m.unknown = jm.at("unknown").get<std::size_t>();
        m.generated = jm.at("generated").get<std::size_t>();
        m.incomplete = jm.at("incomplete").get<std::size_t>();
        for (const auto& c : jm.value("cpp", json::array())) m.cpp.push_back(cpp_from_json(c));
        if (jm.contains("mean_revisit")) m.mean_revisit = jm.at("mean_revisit").get<double>();
        if (jm.contains("error")) m.error = jm.at("error").get<std::string>();
        if (jm.contains("prediction")) {
          for (const auto& [len, v] : jm.at("prediction").items()) {
            m.prediction[std::stoul(len)] = v.get<std::vector<double>>();
          }
        }
        s.models.push_back(std::move(m));
      }
      r.scenarios.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw EvalError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string render_markdown(const EvalReport& r) {
  std::vector<std::string> models;
  for (const auto& s : r.scenarios) {
    for (const auto& m : s.models) {
      if (std::find(models.begin(), models.end(), m.model) == models.end()) models.push_back(m.model);
    }
  }
  struct Table {
    const char* title;
    double (*get)(const ModelEval&);
    bool lower_is_better;
  };
  const Table tables[] = {
      {"Route distribution d_JS", [](const ModelEval& m) { return m.d_js; }, true},
      {"BLEU (mean)", [](const ModelEval& m) { return m.bleu.mean; }, false},
      {"METEOR (mean)", [](const ModelEval& m) { return m.meteor.mean; }, false},
  };
  std::ostringstream os;
  for (const auto& t : tables) {
    os << "### " << t.title << "\n\n| Scenario | H(D) |";
    for (const auto& m : models) os << ' ' << m << " |";
    os << "\n|---|---|";
    for (std::size_t i = 0; i < models.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& s : r.scenarios) {
      std::optional<double> best;
      for (const auto& m : s.models) {
        if (m.error) continue;
        const double v = t.get(m);
        if (!best || (t.lower_is_better ? v < *best : v > *best)) best = v;
      }
      os << "| " << s.scenario << " | " << fmt(s.real_entropy) << " |";
      for (const auto& name : models) {
        auto it = std::find_if(s.models.begin(), s.models.end(),
                               [&](const ModelEval& m) { return m.model == name; });
        if (it == s.models.end()) {
          os << " - |";
          continue;
        }
        if (it->error) {
          os << " error |";
          continue;
        }
        const std::string v = fmt(t.get(*it));
        const bool is_best = best && fmt(*best) == v;
        os << ' ' << (is_best ? "**" + v + "**" : v) << " |";
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

void write_ccdf_csv(std::ostream& os, const EvalReport& r) {
  os << "scenario,model,k,x,ccdf\n";
  for (const auto& s : r.scenarios) {
    for (const auto& m : s.models) {
      for (const auto& c : m.cpp) {
        for (std::size_t i = 0; i < c.grid.size(); ++i) {
          os << s.scenario << ',' << m.model << ',' << c.k << ',' << fmt(c.grid[i]) << ','
             << c.ccdf[i] << '\n';
        }
      }
    }
  }
}

}  // namespace trajlab::eval
