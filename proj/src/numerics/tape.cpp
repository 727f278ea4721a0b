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

#include "sidrec/numerics/tape.hpp"

#include "sidrec/common/error.hpp"

namespace sidrec {

template <typename Real>
Var<Real> Tape<Real>::constant(Tensor<Real> value) {
  if (!value.all_finite()) fail(ErrorKind::kNumeric, "non-finite constant recorded on tape");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Var<Real> Tape<Real>::parameter(Parameter<Real>& param) {
  if (!param.value.all_finite()) fail(ErrorKind::kNumeric, "non-finite parameter '" + param.name + "'");
  Node node;
  node.value = param.value;
  node.requires_grad = true;
  node.param = &param;
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Var<Real> Tape<Real>::record(const char* op, Tensor<Real> value,
                             std::initializer_list<Var<Real>> inputs, BackwardFn backward) {
  bool needs = false;
  for (const auto& v : inputs) needs = needs || nodes_[v.id].requires_grad;
  return record(op, std::move(value), needs, std::move(backward));
}

template <typename Real>
Var<Real> Tape<Real>::record(const char* op, Tensor<Real> value, bool requires_grad,
                             BackwardFn backward) {
  if (!value.all_finite()) fail(ErrorKind::kNumeric, std::string("non-finite output from ") + op);
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
Tensor<Real>& Tape<Real>::grad(int id) {
  Node& node = nodes_[id];
  if (node.grad.data.empty()) node.grad = Tensor<Real>(node.value.shape);
  return node.grad;
}

template <typename Real>
void Tape<Real>::backward(Var<Real> loss) {
  if (loss.tape != this) fail(ErrorKind::kContract, "backward() on a value from another tape");
  if (nodes_[loss.id].value.size() != 1) {
    fail(ErrorKind::kDimension, "backward() needs a scalar, got " + shape_string(nodes_[loss.id].value.shape));
  }
  grad(loss.id).data[0] = Real(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.data.empty()) continue;
    if (node.backward) node.backward(*this, id);
    if (node.param != nullptr) {
      if (!node.grad.all_finite()) {
        fail(ErrorKind::kNumeric, "non-finite gradient for parameter '" + node.param->name + "'");
      }
      auto& dst = node.param->grad;
      if (dst.shape != node.value.shape) dst = Tensor<Real>(node.value.shape);
      for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += node.grad.data[i];
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace sidrec
