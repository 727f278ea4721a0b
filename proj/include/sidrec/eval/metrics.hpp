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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sidrec/eval/beam_search.hpp"
#include "sidrec/sid/sid_table.hpp"

namespace sidrec {

// Resolves the top-k SIDs of one result to items (random choice on
// collisions, nothing for a SID outside the table) and drops repeated items,
// keeping the first. Config error when k exceeds the result length.
std::vector<std::uint64_t> resolved_top_k(const RetrievalResult& result, std::size_t k, const SidTable& table,
                                          Rng& rng);

// Fraction of queries whose truth item is among the resolved top-k. Query q
// resolves collisions with Rng::derive(seed, q).
double recall_at_k(const std::vector<RetrievalResult>& results, const std::vector<std::uint64_t>& truth,
                   std::size_t k, const SidTable& table, std::uint64_t seed);

// Generated SIDs absent from the table over all generated SIDs; 0 when
// nothing was generated.
double hallucination_rate(const std::vector<RetrievalResult>& results, const SidTable& table);

// Smallest number of items, taken by descending count, whose share of the
// total reaches `coverage`. Data error when every count is zero.
std::size_t effective_vocab_size(const std::vector<double>& counts, double coverage = 0.95);

using MetricMap = std::map<std::string, double>;

// key=value lines in key order; integers print without a fraction.
void write_metrics(const std::string& path, const MetricMap& metrics);
MetricMap read_metrics(const std::string& path);

}  // namespace sidrec
