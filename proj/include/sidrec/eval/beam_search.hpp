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
#include <span>
#include <vector>

#include "sidrec/lm/model.hpp"
#include "sidrec/lm/vocab.hpp"
#include "sidrec/sid/sid_trie.hpp"

namespace sidrec {

enum class DecodeMode { kFree, kConstrained };

struct Beam {
  std::vector<std::uint32_t> codes;
  double log_prob = 0;
  bool alive = true;
};

struct ScoredSid {
  SemanticId sid;
  double score = 0;
};

// Best first; equal scores ordered lexicographically by SID.
struct RetrievalResult {
  std::vector<ScoredSid> ranked;
};

// Step l scores only level-l SID tokens: the log-probability of a code is the
// log-softmax of the logits restricted to that level's range. Constrained mode
// additionally drops codes that leave the trie, without renormalizing, so a
// surviving hypothesis keeps its free-mode score. There is no length
// normalization because every hypothesis has exactly L tokens.
struct DecodeOptions {
  std::size_t width = 10;
  DecodeMode mode = DecodeMode::kFree;
  const SidTrie* trie = nullptr;  // required in constrained mode
};

RetrievalResult beam_search(const SequenceModel<float>& model, const Vocabulary& vocab,
                            std::span<const std::uint32_t> prompt, const DecodeOptions& options);

// Decodes queries in lockstep groups so each forward pass covers many beams.
// Results are identical to calling beam_search per prompt.
std::vector<RetrievalResult> beam_search_many(const SequenceModel<float>& model, const Vocabulary& vocab,
                                              const std::vector<std::vector<std::uint32_t>>& prompts,
                                              const DecodeOptions& options);

// Score of a complete SID under the same per-level normalization, from a
// single forward pass over prompt + SID.
double sid_log_prob(const SequenceModel<float>& model, const Vocabulary& vocab, std::span<const std::uint32_t> prompt,
                    const SemanticId& sid);

}  // namespace sidrec
