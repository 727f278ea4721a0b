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

#include "sidrec/numerics/tensor.hpp"

#include <cmath>
#include <sstream>

#include "sidrec/common/error.hpp"

namespace sidrec {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

template <typename Real>
Tensor<Real>::Tensor(Shape s, Real fill_value) : shape(std::move(s)) {
  for (auto e : shape) {
    if (e == 0) fail(ErrorKind::kDimension, "tensor extents must be positive, got " + shape_string(shape));
  }
  data.assign(shape_size(shape), fill_value);
}

template <typename Real>
Tensor<Real>::Tensor(Shape s, std::vector<Real> values)
    : shape(std::move(s)), data(std::move(values)) {
  if (shape_size(shape) != data.size()) {
    fail(ErrorKind::kDimension, "shape " + shape_string(shape) + " does not match " +
                                    std::to_string(data.size()) + " values");
  }
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (data.size() != 1) fail(ErrorKind::kDimension, "item() on tensor of shape " + shape_string(shape));
  return data[0];
}

template <typename Real>
bool Tensor<Real>::all_finite() const {
  for (Real v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename Real>
void Tensor<Real>::fill(Real v) {
  std::fill(data.begin(), data.end(), v);
}

template struct Tensor<float>;
template struct Tensor<double>;

}  // namespace sidrec
