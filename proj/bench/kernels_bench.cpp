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

// Parallel kernels against their serial reference versions.
#include <benchmark/benchmark.h>

#include <vector>

#include "sidrec/numerics/kernels.hpp"
#include "sidrec/numerics/rng.hpp"

namespace sidrec {
namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

template <bool kParallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_floats(n * n, 1);
  const auto b = random_floats(n * n, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::gemm(a.data(), b.data(), c.data(), n, n, n, false);
    } else {
      kernels::reference::gemm(a.data(), b.data(), c.data(), n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}

template <bool kParallel>
void BM_GemmNt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_floats(n * n, 3);
  const auto b = random_floats(n * n, 4);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::gemm_nt(a.data(), b.data(), c.data(), n, n, n, false);
    } else {
      kernels::reference::gemm_nt(a.data(), b.data(), c.data(), n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}

// 16 sequences of length range(0), width 128, 4 heads.
template <bool kParallel>
void BM_Attention(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kSeqs = 16, kDim = 128, kHeads = 4;
  std::vector<std::size_t> offsets{0};
  for (std::size_t s = 0; s < kSeqs; ++s) offsets.push_back(offsets.back() + len);
  const auto qkv = random_floats(offsets.back() * 3 * kDim, 5);
  std::vector<float> out(offsets.back() * kDim), probs;
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::attention_forward(qkv.data(), offsets, kDim, kHeads, out.data(), probs);
    } else {
      kernels::reference::attention_forward(qkv.data(), offsets, kDim, kHeads, out.data(), probs);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_NearestRows(benchmark::State& state) {
  const auto codes = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kPoints = 4096, kDim = 32;
  const auto points = random_doubles(kPoints * kDim, 6);
  const auto book = random_doubles(codes * kDim, 7);
  std::vector<std::uint32_t> idx(kPoints);
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::nearest_rows(points.data(), kPoints, book.data(), codes, kDim, idx.data());
    } else {
      kernels::reference::nearest_rows(points.data(), kPoints, book.data(), codes, kDim, idx.data());
    }
    benchmark::DoNotOptimize(idx.data());
  }
}

BENCHMARK(BM_Gemm<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_GemmNt<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_GemmNt<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Attention<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_Attention<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_NearestRows<true>)->Arg(64)->Arg(2048);
BENCHMARK(BM_NearestRows<false>)->Arg(64)->Arg(2048);

}  // namespace
}  // namespace sidrec

BENCHMARK_MAIN();
