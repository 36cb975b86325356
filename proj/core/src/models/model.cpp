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

#include "trajlab/models/model.hpp"

#include <cstdio>
#include <fstream>

#include "trajlab/common/errors.hpp"

namespace trajlab::models {

namespace fs = std::filesystem;
using nd::ParameterSet;
using nd::Tensor;

const char* to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::TRN: return "TRN";
    case ModelKind::MMC: return "MMC";
    case ModelKind::RNN: return "RNN";
    case ModelKind::ARNN: return "ARNN";
    case ModelKind::SVF: return "SVF";
    case ModelKind::SAVF: return "SAVF";
    case ModelKind::TrajGAIL: return "TrajGAIL";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  for (ModelKind k : {ModelKind::TRN, ModelKind::MMC, ModelKind::RNN, ModelKind::ARNN,
                      ModelKind::SVF, ModelKind::SAVF, ModelKind::TrajGAIL}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown model kind: " + s);
}

const Domain& TrainedModel::domain() const {
  return std::visit([](const auto& m) -> const Domain& { return m.domain(); }, model);
}

ModelRunner::ModelRunner(const TrainedModel& m, std::size_t workers) {
  if (const auto* t = std::get_if<TransitionMatrix>(&m.model)) {
    own_ = std::make_unique<TransitionSession>(*t);
  } else if (const auto* me = std::get_if<MaxEntModel>(&m.model)) {
    own_ = std::make_unique<MaxEntSession>(*me);
  } else if (const auto* p = std::get_if<SequencePolicy>(&m.model)) {
    sampler_ = std::make_unique<PolicySampler>(*p, std::span<const double>{}, workers);
  } else {
    const auto& g = std::get<TrajGailBundle>(m.model);
    sampler_ = std::make_unique<PolicySampler>(g.policy, std::span<const double>{}, workers);
  }
  session_ = own_ ? own_.get() : &sampler_->session();
}

std::uint32_t ModelRunner::context_for(double depart) const {
  return sampler_ ? sampler_->context_for(depart) : 0;
}

demandgen::TrajectoryDataset ModelRunner::sample(const RolloutConfig& cfg,
                                                 std::span<const double> departs) {
  std::vector<std::uint32_t> ctx;
  for (double d : departs) ctx.push_back(context_for(d));
  return rollout_sample(*session_, cfg, ctx, departs);
}

namespace {

void copy_into(ParameterSet& dst, const ParameterSet& src) {
  for (const auto& n : src.names()) dst.add(n, src.get(n).value());
}

ParameterSet take_prefix(const ParameterSet& src, const std::string& prefix) {
  ParameterSet out;
  for (const auto& n : src.names()) {
    if (n.rfind(prefix + ".", 0) == 0) out.add(n, src.get(n).value());
  }
  return out;
}

Tensor row_tensor(const std::vector<double>& v) {
  Tensor t = Tensor::matrix(1, v.size());
  std::copy(v.begin(), v.end(), t.data());
  return t;
}

std::vector<double> row_values(const Tensor& t) { return {t.data(), t.data() + t.size()}; }

std::string context_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "contexts.%06zu", k);
  return buf;
}

}  // namespace

void save_model(const fs::path& dir, const TrainedModel& m, const std::string& net_hash) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create model directory " + dir.string());
  ParameterSet out;
  nlohmann::json cfg = m.config;
  if (const auto* t = std::get_if<TransitionMatrix>(&m.model)) {
    out.add("counts", t->counts());
  } else if (const auto* me = std::get_if<MaxEntModel>(&m.model)) {
    out.add("weights", row_tensor(me->weights()));
    out.add("origin", row_tensor(me->origin()));
    cfg["horizon"] = me->horizon();
  } else if (const auto* p = std::get_if<SequencePolicy>(&m.model)) {
    copy_into(out, p->params);
    for (std::size_t k = 0; k < p->contexts.states().size(); ++k) {
      out.add(context_name(k), p->contexts.states()[k]);
    }
    cfg["net"] = to_json(p->net.config());
  } else {
    const auto& g = std::get<TrajGailBundle>(m.model);
    copy_into(out, g.policy.params);
    copy_into(out, g.value);
    copy_into(out, g.disc);
    cfg["net"] = to_json(g.policy.net.config());
    cfg["gamma"] = g.gamma;
    cfg["lambda"] = g.lambda;
  }
  out.save(dir / "params.tlab");
  nlohmann::json man = {{"model_kind", to_string(m.kind)},
                        {"granularity", to_string(m.domain().granularity())},
                        {"config", cfg},
                        {"seed", m.seed},
                        {"net_hash", net_hash}};
  std::ofstream os(dir / "manifest.json");
  os << man.dump(2) << '\n';
  if (!os) throw IoError("cannot write model manifest in " + dir.string());
}

nlohmann::json read_model_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw IoError("missing model manifest in " + dir.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model manifest: ") + e.what());
  }
}

TrainedModel load_model(const fs::path& dir, const Domain& domain, const std::string& net_hash) {
  const nlohmann::json man = read_model_manifest(dir);
  TrainedModel m;
  try {
    m.kind = model_kind_from_string(man.at("model_kind").get<std::string>());
    m.seed = man.at("seed").get<std::uint64_t>();
    m.config = man.at("config");
    if (man.at("net_hash").get<std::string>() != net_hash) {
      throw IoError("model was trained on a different network");
    }
    if (granularity_from_string(man.at("granularity").get<std::string>()) != domain.granularity()) {
      throw IoError("model granularity does not match the domain");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model manifest: ") + e.what());
  }
  ParameterSet in = ParameterSet::load(dir / "params.tlab");
  switch (m.kind) {
    case ModelKind::TRN:
    case ModelKind::MMC:
      m.model = TransitionMatrix::from_counts(domain, in.get("counts").value());
      break;
    case ModelKind::SVF:
    case ModelKind::SAVF:
      m.model = MaxEntModel(domain, m.kind == ModelKind::SVF ? MaxEntMode::SVF : MaxEntMode::SAVF,
                            m.config.at("horizon").get<std::size_t>(),
                            row_values(in.get("weights").value()),
                            row_values(in.get("origin").value()));
      break;
    case ModelKind::RNN:
    case ModelKind::ARNN: {
      SequencePolicy p;
      p.net = SequenceNet(domain, net_config_from_json(m.config.at("net")), "policy");
      p.params = take_prefix(in, "policy");
      std::vector<Tensor> ctx;
      for (std::size_t k = 0; in.contains(context_name(k)); ++k) {
        ctx.push_back(in.get(context_name(k)).value());
      }
      if (!ctx.empty()) p.contexts = TrafficContexts(std::move(ctx));
      m.model = std::move(p);
      break;
    }
    case ModelKind::TrajGAIL: {
      TrajGailBundle b;
      const NetConfig net = net_config_from_json(m.config.at("net"));
      b.policy.net = SequenceNet(domain, net, "policy");
      b.policy.params = take_prefix(in, "policy");
      b.value_net = SequenceNet(domain, net, "value");
      b.value = take_prefix(in, "value");
      b.disc_net = SequenceNet(domain, net, "disc");
      b.disc = take_prefix(in, "disc");
      b.gamma = m.config.at("gamma").get<double>();
      b.lambda = m.config.at("lambda").get<double>();
      m.model = std::move(b);
      break;
    }
  }
  return m;
}

}  // namespace trajlab::models
