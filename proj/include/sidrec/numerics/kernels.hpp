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
#include <cstdint>
#include <span>
#include <vector>

// Dense compute kernels. The default implementations are OpenMP-parallel over
// disjoint output rows with a fixed per-element summation order, so results do
// not depend on the thread count. `reference` holds the plain serial versions
// the tests and the benchmark compare against.
namespace sidrec::kernels {

// C[m x n] = A[m x k] * B[k x n]; accumulates into C when `accumulate`.
template <typename Real>
void gemm(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate);

// C[k x n] = A[m x k]^T * B[m x n].
template <typename Real>
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);

// C[m x n] = A[m x k] * B[n x k]^T.
template <typename Real>
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);

// Causal multi-head self-attention over a ragged batch. `qkv` is
// [tokens x 3*dim] laid out as [Q | K | V]; sequence s spans rows
// offsets[s]..offsets[s+1]. `probs` receives the per (sequence, head)
// lower-triangular attention matrices, `out` is [tokens x dim].
template <typename Real>
void attention_forward(const Real* qkv, std::span<const std::size_t> offsets,
                       std::size_t dim, std::size_t heads, Real* out,
                       std::vector<Real>& probs);

// Same rows as attention_forward, computed only from row skip[s] of each
// sequence onward; earlier output rows are left untouched.
template <typename Real>
void attention_forward_tail(const Real* qkv, std::span<const std::size_t> offsets,
                            std::span<const std::size_t> skip, std::size_t dim, std::size_t heads,
                            Real* out);

template <typename Real>
void attention_backward(const Real* qkv, std::span<const std::size_t> offsets,
                        std::size_t dim, std::size_t heads,
                        const std::vector<Real>& probs, const Real* dout,
                        Real* dqkv);

// Offset of the (sequence, head) block inside the `probs` buffer.
std::vector<std::size_t> attention_prob_offsets(std::span<const std::size_t> offsets,
                                                std::size_t heads);

// For each point row, index of the nearest codebook row by squared Euclidean
// distance; ties resolve to the lowest index.
void nearest_rows(const double* points, std::size_t count, const double* codebook,
                  std::size_t codes, std::size_t dim, std::uint32_t* out_index);

namespace reference {

template <typename Real>
void gemm(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate);
template <typename Real>
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <typename Real>
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <typename Real>
void attention_forward(const Real* qkv, std::span<const std::size_t> offsets,
                       std::size_t dim, std::size_t heads, Real* out,
                       std::vector<Real>& probs);
void nearest_rows(const double* points, std::size_t count, const double* codebook,
                  std::size_t codes, std::size_t dim, std::uint32_t* out_index);

}  // namespace reference
}  // namespace sidrec::kernels
