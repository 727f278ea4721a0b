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
#include <vector>

#include "sidrec/numerics/tape.hpp"

// Differentiable primitives. Every op checks shapes eagerly and raises a
// dimension error quoting both operand shapes.
namespace sidrec::ops {

template <typename Real> Var<Real> matmul(Var<Real> a, Var<Real> b);
// a [m x k] times b^T for b [n x k].
template <typename Real> Var<Real> matmul_nt(Var<Real> a, Var<Real> b);

template <typename Real> Var<Real> add(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> sub(Var<Real> a, Var<Real> b);
template <typename Real> Var<Real> scale(Var<Real> a, Real factor);
// Adds a length-cols bias to every row.
template <typename Real> Var<Real> add_bias(Var<Real> x, Var<Real> bias);

template <typename Real> Var<Real> relu(Var<Real> x);
// tanh approximation.
template <typename Real> Var<Real> gelu(Var<Real> x);
template <typename Real>
Var<Real> layer_norm(Var<Real> x, Var<Real> gain, Var<Real> bias, Real eps = Real(1e-5));

template <typename Real> Var<Real> concat_cols(std::span<const Var<Real>> parts);
// out[i] = table[rows[i]]; gradient scatters back additively.
template <typename Real>
Var<Real> gather_rows(Var<Real> table, std::span<const std::size_t> rows);

template <typename Real> Var<Real> sum_squares(Var<Real> x);
template <typename Real>
Var<Real> weighted_sum(std::span<const Var<Real>> scalars, std::span<const Real> weights);

template <typename Real> Var<Real> stop_gradient(Var<Real> x);

template <typename Real>
Var<Real> causal_attention(Var<Real> qkv, std::span<const std::size_t> offsets,
                           std::size_t heads);

// Mean over rows of -log softmax(logits[i])[targets[i]], max-subtracted.
template <typename Real>
Var<Real> softmax_cross_entropy(Var<Real> logits, std::span<const std::size_t> targets);

// As above, but column excluded[i] is removed from row i's partition function.
template <typename Real>
Var<Real> softmax_cross_entropy(Var<Real> logits, std::span<const std::size_t> targets,
                                std::span<const std::size_t> excluded);

}  // namespace sidrec::ops
