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

#include "sidrec/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace sidrec::kernels {
namespace {

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 15;

template <typename Real>
std::vector<Real>& transpose_scratch() {
  thread_local std::vector<Real> buf;
  return buf;
}

template <typename Real>
inline Real dot(const Real* x, const Real* y, std::size_t n) {
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

template <typename Real>
void gemm(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    Real* ci = c + i * n;
    if (!accumulate) std::fill(ci, ci + n, Real(0));
    const Real* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = ai[p];
      const Real* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <typename Real>
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  constexpr std::size_t kBlock = 64;
  const auto out_rows = static_cast<std::ptrdiff_t>(k);
  if (!accumulate) std::fill(c, c + k * n, Real(0));
#pragma omp parallel if (m * k * n > kParallelThreshold)
  for (std::size_t i0 = 0; i0 < m; i0 += kBlock) {
    const std::size_t i1 = std::min(m, i0 + kBlock);
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < out_rows; ++p) {
      Real* cp = c + p * n;
      for (std::size_t i = i0; i < i1; ++i) {
        const Real av = a[i * k + p];
        const Real* bi = b + i * n;
        for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
      }
    }
  }
}

template <typename Real>
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  auto& bt = transpose_scratch<Real>();
  bt.resize(k * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < k; ++p) bt[p * n + r] = b[r * k + p];
  }
  gemm(a, bt.data(), c, m, k, n, accumulate);
}

std::vector<std::size_t> attention_prob_offsets(std::span<const std::size_t> offsets,
                                                std::size_t heads) {
  std::vector<std::size_t> out;
  out.reserve(offsets.size());
  std::size_t total = 0;
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    out.push_back(total);
    const std::size_t len = offsets[s + 1] - offsets[s];
    total += heads * len * len;
  }
  out.push_back(total);
  return out;
}

namespace {

// Row t of one (sequence, head) block: scores against keys 0..t, softmax into
// pt[0..t], weighted sum of values into o.
template <typename Real>
inline void attend_row(const Real* qkv, std::size_t base, std::size_t t, std::size_t dim, std::size_t h,
                       std::size_t head_dim, Real scale, Real* pt, Real* o) {
  const std::size_t stride = 3 * dim;
  const Real* q = qkv + (base + t) * stride + h * head_dim;
  Real row_max = -std::numeric_limits<Real>::infinity();
  for (std::size_t u = 0; u <= t; ++u) {
    const Real* key = qkv + (base + u) * stride + dim + h * head_dim;
    pt[u] = dot(q, key, head_dim) * scale;
    row_max = std::max(row_max, pt[u]);
  }
  Real total = 0;
  for (std::size_t u = 0; u <= t; ++u) {
    pt[u] = std::exp(pt[u] - row_max);
    total += pt[u];
  }
  std::fill(o, o + head_dim, Real(0));
  for (std::size_t u = 0; u <= t; ++u) {
    pt[u] /= total;
    const Real* v = qkv + (base + u) * stride + 2 * dim + h * head_dim;
    for (std::size_t j = 0; j < head_dim; ++j) o[j] += pt[u] * v[j];
  }
}

}  // namespace

template <typename Real>
void attention_forward(const Real* qkv, std::span<const std::size_t> offsets,
                       std::size_t dim, std::size_t heads, Real* out,
                       std::vector<Real>& probs) {
  const std::size_t seqs = offsets.size() - 1;
  const std::size_t head_dim = dim / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(head_dim));
  const auto prob_at = attention_prob_offsets(offsets, heads);
  probs.assign(prob_at.back(), Real(0));
  const auto jobs = static_cast<std::ptrdiff_t>(seqs * heads);

#pragma omp parallel for schedule(dynamic, 4) if (offsets.back() * dim > kParallelThreshold)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t s = static_cast<std::size_t>(job) / heads;
    const std::size_t h = static_cast<std::size_t>(job) % heads;
    const std::size_t base = offsets[s];
    const std::size_t len = offsets[s + 1] - base;
    Real* p = probs.data() + prob_at[s] + h * len * len;
    for (std::size_t t = 0; t < len; ++t) {
      attend_row(qkv, base, t, dim, h, head_dim, scale, p + t * len, out + (base + t) * dim + h * head_dim);
    }
  }
}

template <typename Real>
void attention_forward_tail(const Real* qkv, std::span<const std::size_t> offsets,
                            std::span<const std::size_t> skip, std::size_t dim, std::size_t heads,
                            Real* out) {
  const std::size_t seqs = offsets.size() - 1;
  const std::size_t head_dim = dim / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(head_dim));
  const auto jobs = static_cast<std::ptrdiff_t>(seqs * heads);

#pragma omp parallel for schedule(dynamic, 4) if (offsets.back() * dim > kParallelThreshold)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const std::size_t s = static_cast<std::size_t>(job) / heads;
    const std::size_t h = static_cast<std::size_t>(job) % heads;
    const std::size_t base = offsets[s];
    const std::size_t len = offsets[s + 1] - base;
    std::vector<Real> scores(len);
    for (std::size_t t = std::min(skip[s], len); t < len; ++t) {
      attend_row(qkv, base, t, dim, h, head_dim, scale, scores.data(), out + (base + t) * dim + h * head_dim);
    }
  }
}

template <typename Real>
void attention_backward(const Real* qkv, std::span<const std::size_t> offsets,
                        std::size_t dim, std::size_t heads,
                        const std::vector<Real>& probs, const Real* dout,
                        Real* dqkv) {
  const std::size_t seqs = offsets.size() - 1;
  const std::size_t head_dim = dim / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(head_dim));
  const std::size_t stride = 3 * dim;
  const auto prob_at = attention_prob_offsets(offsets, heads);
  const auto jobs = static_cast<std::ptrdiff_t>(seqs * heads);

#pragma omp parallel if (offsets.back() * dim > kParallelThreshold)
  {
    std::vector<Real> dscore;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t job = 0; job < jobs; ++job) {
      const std::size_t s = static_cast<std::size_t>(job) / heads;
      const std::size_t h = static_cast<std::size_t>(job) % heads;
      const std::size_t base = offsets[s];
      const std::size_t len = offsets[s + 1] - base;
      const Real* p = probs.data() + prob_at[s] + h * len * len;
      dscore.resize(len);
      for (std::size_t t = 0; t < len; ++t) {
        const Real* pt = p + t * len;
        const Real* dot_t = dout + (base + t) * dim + h * head_dim;
        const Real* q = qkv + (base + t) * stride + h * head_dim;
        Real weighted = 0;
        for (std::size_t u = 0; u <= t; ++u) {
          const Real* v = qkv + (base + u) * stride + 2 * dim + h * head_dim;
          dscore[u] = dot(dot_t, v, head_dim);
          weighted += pt[u] * dscore[u];
        }
        Real* dq = dqkv + (base + t) * stride + h * head_dim;
        for (std::size_t u = 0; u <= t; ++u) {
          const Real ds = pt[u] * (dscore[u] - weighted) * scale;
          const Real* key = qkv + (base + u) * stride + dim + h * head_dim;
          Real* dk = dqkv + (base + u) * stride + dim + h * head_dim;
          Real* dv = dqkv + (base + u) * stride + 2 * dim + h * head_dim;
          for (std::size_t j = 0; j < head_dim; ++j) {
            dq[j] += ds * key[j];
            dk[j] += ds * q[j];
            dv[j] += pt[u] * dot_t[j];
          }
        }
      }
    }
  }
}

void nearest_rows(const double* points, std::size_t count, const double* codebook,
                  std::size_t codes, std::size_t dim, std::uint32_t* out_index) {
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static) if (count * codes * dim > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* x = points + i * dim;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = 0;
    for (std::size_t c = 0; c < codes; ++c) {
      const double* e = codebook + c * dim;
      double d = 0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = x[j] - e[j];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_index = static_cast<std::uint32_t>(c);
      }
    }
    out_index[i] = best_index;
  }
}

namespace reference {

template <typename Real>
void gemm(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real s = accumulate ? c[i * n + j] : Real(0);
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

template <typename Real>
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      Real s = accumulate ? c[p * n + j] : Real(0);
      for (std::size_t i = 0; i < m; ++i) s += a[i * k + p] * b[i * n + j];
      c[p * n + j] = s;
    }
  }
}

template <typename Real>
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real s = accumulate ? c[i * n + j] : Real(0);
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
  }
}

template <typename Real>
void attention_forward(const Real* qkv, std::span<const std::size_t> offsets,
                       std::size_t dim, std::size_t heads, Real* out,
                       std::vector<Real>& probs) {
  const std::size_t head_dim = dim / heads;
  const std::size_t stride = 3 * dim;
  const auto prob_at = attention_prob_offsets(offsets, heads);
  probs.assign(prob_at.back(), Real(0));
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t base = offsets[s];
    const std::size_t len = offsets[s + 1] - base;
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<Real> scores(len * len, -std::numeric_limits<Real>::infinity());
      for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t u = 0; u <= t; ++u) {
          Real acc = 0;
          for (std::size_t j = 0; j < head_dim; ++j) {
            acc += qkv[(base + t) * stride + h * head_dim + j] *
                   qkv[(base + u) * stride + dim + h * head_dim + j];
          }
          scores[t * len + u] = acc / std::sqrt(static_cast<Real>(head_dim));
        }
      }
      Real* p = probs.data() + prob_at[s] + h * len * len;
      for (std::size_t t = 0; t < len; ++t) {
        const Real mx = *std::max_element(scores.begin() + t * len, scores.begin() + (t + 1) * len);
        Real z = 0;
        for (std::size_t u = 0; u < len; ++u) z += std::exp(scores[t * len + u] - mx);
        for (std::size_t u = 0; u < len; ++u) p[t * len + u] = std::exp(scores[t * len + u] - mx) / z;
        for (std::size_t j = 0; j < head_dim; ++j) {
          Real acc = 0;
          for (std::size_t u = 0; u < len; ++u) {
            acc += p[t * len + u] * qkv[(base + u) * stride + 2 * dim + h * head_dim + j];
          }
          out[(base + t) * dim + h * head_dim + j] = acc;
        }
      }
    }
  }
}

void nearest_rows(const double* points, std::size_t count, const double* codebook,
                  std::size_t codes, std::size_t dim, std::uint32_t* out_index) {
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> dist(codes);
    for (std::size_t c = 0; c < codes; ++c) {
      double d = 0;
      for (std::size_t j = 0; j < dim; ++j) {
        d += (points[i * dim + j] - codebook[c * dim + j]) * (points[i * dim + j] - codebook[c * dim + j]);
      }
      dist[c] = d;
    }
    out_index[i] = static_cast<std::uint32_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
  }
}

}  // namespace reference

#define SIDREC_INSTANTIATE_KERNELS(Real)                                                      \
  template void gemm<Real>(const Real*, const Real*, Real*, std::size_t, std::size_t,        \
                           std::size_t, bool);                                               \
  template void gemm_tn<Real>(const Real*, const Real*, Real*, std::size_t, std::size_t,     \
                              std::size_t, bool);                                            \
  template void gemm_nt<Real>(const Real*, const Real*, Real*, std::size_t, std::size_t,     \
                              std::size_t, bool);                                            \
  template void attention_forward<Real>(const Real*, std::span<const std::size_t>,           \
                                        std::size_t, std::size_t, Real*, std::vector<Real>&); \
  template void attention_forward_tail<Real>(const Real*, std::span<const std::size_t>,      \
                                             std::span<const std::size_t>, std::size_t,      \
                                             std::size_t, Real*);                            \
  template void attention_backward<Real>(const Real*, std::span<const std::size_t>,          \
                                         std::size_t, std::size_t, const std::vector<Real>&, \
                                         const Real*, Real*);                                \
  template void reference::gemm<Real>(const Real*, const Real*, Real*, std::size_t,          \
                                      std::size_t, std::size_t, bool);                       \
  template void reference::gemm_tn<Real>(const Real*, const Real*, Real*, std::size_t,       \
                                         std::size_t, std::size_t, bool);                    \
  template void reference::gemm_nt<Real>(const Real*, const Real*, Real*, std::size_t,       \
                                         std::size_t, std::size_t, bool);                    \
  template void reference::attention_forward<Real>(const Real*, std::span<const std::size_t>, \
                                                   std::size_t, std::size_t, Real*,          \
                                                   std::vector<Real>&);

SIDREC_INSTANTIATE_KERNELS(float)
SIDREC_INSTANTIATE_KERNELS(double)

}  // namespace sidrec::kernels
