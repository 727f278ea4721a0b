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

#include "sidrec/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

double evaluate(const LossBuilder& loss_fn) {
  Tape<double> tape;
  return loss_fn(tape).value().item();
}

}  // namespace

GradCheckReport finite_diff_check(const LossBuilder& loss_fn,
                                  std::span<Parameter<double>* const> params, double eps, double floor) {
  for (auto* p : params) p->zero_grad();
  double base = 0.0;
  {
    Tape<double> tape;
    auto loss = loss_fn(tape);
    base = loss.value().item();
    tape.backward(loss);
  }
  if (evaluate(loss_fn) != base) {
    fail(ErrorKind::kContract, "finite_diff_check: loss is not deterministic at the base point");
  }

  GradCheckReport report;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double saved = p->value.data[i];
      p->value.data[i] = saved + eps;
      const double up = evaluate(loss_fn);
      p->value.data[i] = saved - eps;
      const double down = evaluate(loss_fn);
      p->value.data[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.data[i];
      const double err = std::abs(analytic - numeric) / std::max(floor, std::abs(numeric));
      ++report.coordinates;
      if (err > report.max_relative_error || report.worst_parameter.empty()) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        report.worst_parameter = p->name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace sidrec
