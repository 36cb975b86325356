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

#include <functional>
#include <span>

#include "trajlab/nd/autodiff.hpp"
#include "trajlab/nd/parameters.hpp"

namespace trajlab::nd {

// Max over all scalar entries of |analytic - central| / max(1, |central|).
// f must rebuild its graph from the current parameter values on every call.
double gradient_check(const std::function<Var()>& f, ParameterSet& params,
                      double h = 1e-5);
double gradient_check(const std::function<Var()>& f, std::span<Var> leaves,
                      double h = 1e-5);

}  // namespace trajlab::nd
