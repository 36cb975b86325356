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
#include "trajlab/nd/parameters.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "trajlab/common/errors.hpp"

namespace trajlab::nd {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'A', 'B'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "parameter files are written in native little-endian order");

template <class T>
void put_raw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get_raw(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<std::size_t>(in.gcount()) == sizeof(T);
}

}  // namespace

const Var& ParameterSet::add(const std::string& name, Tensor init) {
  if (name.empty()) throw ContractError("parameter name must not be empty");
  if (slots_.contains(name)) {
    throw ContractError("duplicate parameter name: " + name);
  }
  Tensor zeros(init.shape(), 0.0);
  Slot slot{Var::leaf(std::move(init)), zeros, zeros};
  return slots_.emplace(name, std::move(slot)).first->second.var;
}

const Var& ParameterSet::get(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.var;
}

bool ParameterSet::contains(const std::string& name) const {
  return slots_.contains(name);
}

std::vector<std::string> ParameterSet::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& [k, _] : slots_) out.push_back(k);
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : slots_) n += s.var.value().size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, s] : slots_) s.var.node()->zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [k, s] : slots_) {
    Slot copy{Var::leaf(s.var.value()), s.m, s.v};
    out.slots_.emplace(k, std::move(copy));
  }
  out.step_ = step_;
  return out;
}

// Layout: "TLAB", u32 version, then for each parameter in name order:
// u64 name length, name bytes, u64 rank, rank x u64 dims, f64 values.
void ParameterSet::write(std::ostream& out) const {
  out.write(kMagic, 4);
  put_raw<std::uint32_t>(out, kVersion);
  for (const auto& [name, s] : slots_) {
    const Tensor& t = s.var.value();
    put_raw<std::uint64_t>(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_raw<std::uint64_t>(out, t.rank());
    for (std::size_t d : t.shape()) put_raw<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing parameter container");
}

void ParameterSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write(out);
}

ParameterSet ParameterSet::read(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a parameter container (bad magic)");
  }
  std::uint32_t version = 0;
  if (!get_raw(in, version) || version != kVersion) {
    throw IoError("unsupported parameter container version");
  }
  ParameterSet out;
  while (true) {
    std::uint64_t len = 0;
    if (!get_raw(in, len)) break;  // clean EOF
    if (len == 0 || len > (1u << 20)) throw IoError("corrupt parameter name");
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    std::uint64_t rank = 0;
    if (!in || !get_raw(in, rank) || rank == 0 || rank > 8) {
      throw IoError("corrupt parameter header for " + name);
    }
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!get_raw(in, v) || v == 0) throw IoError("corrupt shape for " + name);
      d = v;
    }
    std::vector<double> values(shape_size(shape));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(double)) {
      throw IoError("truncated values for " + name);
    }
    out.add(name, Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

ParameterSet ParameterSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

bool ParameterSet::same_values(const ParameterSet& other) const {
  if (slots_.size() != other.slots_.size()) return false;
  for (const auto& [k, s] : slots_) {
    auto it = other.slots_.find(k);
    if (it == other.slots_.end()) return false;
    if (!(s.var.value() == it->second.var.value())) return false;
  }
  return true;
}

void adam_update(ParameterSet& params, const AdamConfig& cfg, bool strict) {
  if (!(cfg.lr >= 0.0) || !(cfg.eps > 0.0) || cfg.beta1 < 0.0 ||
      cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
    throw ContractError("invalid Adam hyperparameters");
  }
  if (strict) {
    for (const auto& [name, s] : params.slots_) {
      if (!s.var.node()->grad_touched) {
        throw ContractError("adam_step: no gradient for parameter " + name);
      }
    }
  }
  const std::uint64_t t = params.step_ + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (auto& [name, s] : params.slots_) {
    Node& node = *s.var.node();
    if (node.grad.empty()) continue;
    Tensor& w = node.value;
    const Tensor& g = node.grad;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      if (!std::isfinite(gi)) {
        throw NumericError("adam_step: non-finite gradient in " + name);
      }
      s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * gi;
      s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mh = s.m[i] / c1;
      const double vh = s.v[i] / c2;
      w[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
  params.step_ = t;
  params.zero_grad();
}

void adam_step(ParameterSet& params, const AdamConfig& cfg) {
  adam_update(params, cfg, true);
}

void adam_step_lenient(ParameterSet& params, const AdamConfig& cfg) {
  adam_update(params, cfg, false);
}

}  // namespace trajlab::nd
