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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sidrec {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major tensor. Rank-2 accessors assume shape {rows, cols}.
template <typename Real>
struct Tensor {
  Shape shape;
  std::vector<Real> data;

  Tensor() = default;
  explicit Tensor(Shape s, Real fill = Real(0));
  Tensor(Shape s, std::vector<Real> values);

  static Tensor scalar(Real v) { return Tensor(Shape{1}, std::vector<Real>{v}); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : size() / shape[0]; }

  Real& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  std::span<Real> row(std::size_t r) { return {data.data() + r * cols(), cols()}; }
  std::span<const Real> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }

  Real item() const;
  bool all_finite() const;
  void fill(Real v);

  bool operator==(const Tensor&) const = default;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  Tensor<To> out;
  out.shape = t.shape;
  out.data.assign(t.data.begin(), t.data.end());
  return out;
}

// Named trainable tensor with its gradient accumulator.
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<Real> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape) {}

  void zero_grad() { grad = Tensor<Real>(value.shape); }
};

extern template struct Tensor<float>;
extern template struct Tensor<double>;

}  // namespace sidrec
