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
#include <string>
#include <vector>

#include "sidrec/numerics/rng.hpp"

namespace sidrec {

// inclusive: level l active iff l <= r. paper_literal: active iff l < r, which
// leaves every level off when r == 1.
enum class MaskMode { kInclusive, kPaperLiteral };

// multi_resolution: cardinality halves per level. uniform: every level has the
// same size, chosen so the SID space matches multi_resolution (the ablation arm).
enum class CardinalitySchedule { kMultiResolution, kUniform };

struct SidSpec {
  int levels = 4;
  int base_cardinality = 64;
  double beta = 0.25;
  double contrastive_weight = 1.0;
  double contrastive_temperature = 0.1;
  MaskMode mask_mode = MaskMode::kInclusive;
  CardinalitySchedule schedule = CardinalitySchedule::kMultiResolution;

  // Config error unless every level has a positive integer cardinality.
  void validate() const;
};

// 1-based level.
int codebook_cardinality(int level, const SidSpec& spec);
std::vector<int> cardinalities(const SidSpec& spec);

// Uniform in [1, L].
int sample_mask_rank(const SidSpec& spec, Rng& rng);
// m_l for l = 1..L, as 0/1.
std::vector<int> level_mask(const SidSpec& spec, int rank);

MaskMode parse_mask_mode(const std::string& text);
CardinalitySchedule parse_schedule(const std::string& text);
std::string to_string(MaskMode mode);
std::string to_string(CardinalitySchedule schedule);

}  // namespace sidrec
