// Copyright 2026 The sidrec Authors.
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
#include <string>

#include "sidrec/numerics/tape.hpp"

namespace sidrec {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Builds the scalar loss on the given tape. Must register every parameter in
// `params` through Tape::parameter so the analytic gradient is collected.
using LossBuilder = std::function<Var<double>(Tape<double>&)>;

// Central differences per coordinate against the tape gradient. The error of a
// coordinate is |analytic - numeric| / max(floor, |numeric|). Raises a contract
// error when two evaluations at the unperturbed point disagree.
GradCheckReport finite_diff_check(const LossBuilder& loss_fn,
                                  std::span<Parameter<double>* const> params,
                                  double eps, double floor = 1e-8);

}  // namespace sidrec
