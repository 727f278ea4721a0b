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

#include "sidrec/quantizer/sid_spec.hpp"

#include "sidrec/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace sidrec {

void SidSpec::validate() const {
  if (levels < 1) fail(ErrorKind::kConfig, "sid levels must be >= 1");
  if (base_cardinality < 1) fail(ErrorKind::kConfig, "base_cardinality must be positive");
  if (schedule == CardinalitySchedule::kMultiResolution) {
    const long long divisor = 1LL << (levels - 1);
    if (levels > 31 || base_cardinality % divisor != 0) {
      fail(ErrorKind::kConfig, "base_cardinality " + std::to_string(base_cardinality) +
                                   " is not divisible by 2^(L-1) = " + std::to_string(divisor));
    }
  }
  if (beta < 0) fail(ErrorKind::kConfig, "beta must be non-negative");
  if (contrastive_weight < 0) fail(ErrorKind::kConfig, "contrastive_weight must be non-negative");
  if (!(contrastive_temperature > 0)) fail(ErrorKind::kConfig, "contrastive temperature must be positive");
}

int codebook_cardinality(int level, const SidSpec& spec) {
  if (level < 1 || level > spec.levels) {
    fail(ErrorKind::kIndex, "level " + std::to_string(level) + " outside [1, " + std::to_string(spec.levels) + "]");
  }
  if (spec.schedule == CardinalitySchedule::kUniform) {
    // Geometric mean of the multi-resolution sizes, so both schedules span
    // about the same number of SIDs.
    const double mean = spec.base_cardinality * std::exp2(-0.5 * (spec.levels - 1));
    return std::max(1, static_cast<int>(std::lround(mean)));
  }
  return spec.base_cardinality >> (level - 1);
}

std::vector<int> cardinalities(const SidSpec& spec) {
  std::vector<int> out;
  for (int l = 1; l <= spec.levels; ++l) out.push_back(codebook_cardinality(l, spec));
  return out;
}

int sample_mask_rank(const SidSpec& spec, Rng& rng) {
  return static_cast<int>(rng.range(1, spec.levels));
}

std::vector<int> level_mask(const SidSpec& spec, int rank) {
  std::vector<int> mask(static_cast<std::size_t>(spec.levels));
  for (int l = 1; l <= spec.levels; ++l) {
    const bool on = spec.mask_mode == MaskMode::kInclusive ? l <= rank : l < rank;
    mask[static_cast<std::size_t>(l - 1)] = on ? 1 : 0;
  }
  return mask;
}

MaskMode parse_mask_mode(const std::string& text) {
  if (text == "inclusive") return MaskMode::kInclusive;
  if (text == "paper_literal" || text == "paper-literal") return MaskMode::kPaperLiteral;
  fail(ErrorKind::kConfig, "unknown mask mode '" + text + "' (inclusive|paper_literal)");
}

CardinalitySchedule parse_schedule(const std::string& text) {
  if (text == "multi_resolution") return CardinalitySchedule::kMultiResolution;
  if (text == "uniform") return CardinalitySchedule::kUniform;
  fail(ErrorKind::kConfig, "unknown cardinality schedule '" + text + "' (multi_resolution|uniform)");
}

std::string to_string(MaskMode mode) {
  return mode == MaskMode::kInclusive ? "inclusive" : "paper_literal";
}

std::string to_string(CardinalitySchedule schedule) {
  return schedule == CardinalitySchedule::kMultiResolution ? "multi_resolution" : "uniform";
}

}  // namespace sidrec
