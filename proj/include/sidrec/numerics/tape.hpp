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

#include <deque>
#include <functional>
#include <initializer_list>
#include <string>

#include "sidrec/numerics/tensor.hpp"

namespace sidrec {

template <typename Real>
class Tape;

// Handle to a value recorded on a tape.
template <typename Real>
struct Var {
  Tape<Real>* tape = nullptr;
  int id = -1;

  const Tensor<Real>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape; }
};

// Reverse-mode tape. Nodes are appended in evaluation order; backward() walks
// them in reverse and calls each node's vector-Jacobian product. Gradients
// accumulate additively when a value fans out. Parameter nodes flush their
// gradient into Parameter::grad (also additively) at the end of backward().
template <typename Real>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Real> constant(Tensor<Real> value);
  Var<Real> parameter(Parameter<Real>& param);

  // Appends an op result. The backward function is dropped when no input
  // requires a gradient. Non-finite values raise a numeric error naming `op`.
  Var<Real> record(const char* op, Tensor<Real> value,
                   std::initializer_list<Var<Real>> inputs, BackwardFn backward);
  Var<Real> record(const char* op, Tensor<Real> value, bool requires_grad,
                   BackwardFn backward);

  const Tensor<Real>& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Zero-initialized on first access.
  Tensor<Real>& grad(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.data.empty(); }

  void backward(Var<Real> loss);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;
    bool requires_grad = false;
    Parameter<Real>* param = nullptr;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace sidrec
