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

#include "sidrec/numerics/adam.hpp"

#include <cmath>

#include "sidrec/common/error.hpp"

namespace sidrec {

template <typename Real>
void adam_step(const std::vector<Parameter<Real>*>& params, AdamState<Real>& state) {
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->value.shape);
      state.second_moment.emplace_back(p->value.shape);
    }
  }
  if (state.first_moment.size() != params.size()) {
    fail(ErrorKind::kContract, "adam_step: parameter list changed between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* p = params[i];
    if (p->grad.shape != p->value.shape || state.first_moment[i].shape != p->value.shape) {
      fail(ErrorKind::kDimension, "adam_step: gradient/moment shape mismatch for '" + p->name + "'");
    }
    if (!p->grad.all_finite()) fail(ErrorKind::kNumeric, "non-finite gradient for parameter '" + p->name + "'");
  }

  ++state.step;
  const auto& cfg = state.config;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    auto& m = state.first_moment[i].data;
    auto& v = state.second_moment[i].data;
    for (std::size_t j = 0; j < p->value.data.size(); ++j) {
      const double g = p->grad.data[j];
      m[j] = static_cast<Real>(cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g);
      v[j] = static_cast<Real>(cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g);
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      p->value.data[j] -= static_cast<Real>(cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
}

template void adam_step<float>(const std::vector<Parameter<float>*>&, AdamState<float>&);
template void adam_step<double>(const std::vector<Parameter<double>*>&, AdamState<double>&);

}  // namespace sidrec
