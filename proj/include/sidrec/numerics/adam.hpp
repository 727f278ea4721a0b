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

#include <cstdint>
#include <span>
#include <vector>

#include "sidrec/numerics/tensor.hpp"

namespace sidrec {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Real>
struct AdamState {
  AdamConfig config;
  std::vector<Tensor<Real>> first_moment;
  std::vector<Tensor<Real>> second_moment;
  std::int64_t step = 0;
};

// Bias-corrected Adam update applied in place, one moment pair per parameter
// (allocated on first use). Raises a numeric error naming the parameter when
// any gradient entry is non-finite; no parameter is modified in that case.
template <typename Real>
void adam_step(const std::vector<Parameter<Real>*>& params, AdamState<Real>& state);

}  // namespace sidrec
