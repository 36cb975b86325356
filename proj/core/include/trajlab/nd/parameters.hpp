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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trajlab/nd/autodiff.hpp"

namespace trajlab::nd {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named trainable leaves plus Adam moments. Move-only: copying would alias the
// underlying graph nodes, use clone() for an independent snapshot.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  // Registers a new leaf. Duplicate names are a contract violation.
  const Var& add(const std::string& name, Tensor init);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;  // sorted
  std::size_t size() const noexcept { return slots_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  ParameterSet clone() const;

  std::uint64_t step() const noexcept { return step_; }

  // Binary container; see write() for the layout.
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static ParameterSet read(std::istream& in);
  static ParameterSet load(const std::filesystem::path& path);

  // Values only; moments and step counter are not compared.
  bool same_values(const ParameterSet& other) const;

 private:
  friend void adam_update(ParameterSet&, const AdamConfig&, bool);

  struct Slot {
    Var var;
    Tensor m;
    Tensor v;
  };
  std::map<std::string, Slot> slots_;
  std::uint64_t step_ = 0;
};

// One bias-corrected Adam update over every parameter, then zero_grad().
// Every parameter must have received a gradient since the last step.
void adam_step(ParameterSet& params, const AdamConfig& cfg);

// Same as adam_step but parameters without a gradient are treated as having
// a zero gradient.
void adam_step_lenient(ParameterSet& params, const AdamConfig& cfg);

}  // namespace trajlab::nd
