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

#include "sidrec/datagen/synth.hpp"
#include "sidrec/lm/vocab.hpp"
#include "sidrec/numerics/rng.hpp"
#include "sidrec/sid/sid_table.hpp"

namespace sidrec {

struct PromptOptions {
  std::size_t max_history = 8;
  bool include_history = true;
};

// prompt = <bos> history... | user | context-SID channel ||
// label  = the L SID tokens of the clicked item.
struct SftExample {
  std::vector<std::uint32_t> prompt;
  std::vector<std::uint32_t> label;
  double reward = 0;
  std::uint64_t item_id = 0;  // the clicked item
};

// Example whose click is event `click` (>= 1) of the session; the watch
// before it is the context, earlier watches form the history.
SftExample make_sft_example(const Session& session, std::size_t click, const ItemCatalog& catalog,
                            const SidTable& table, const Vocabulary& vocab, const PromptOptions& options);

// One candidate per click position of every session.
std::vector<SftExample> sft_candidates(const std::vector<Session>& sessions, const ItemCatalog& catalog,
                                       const SidTable& table, const Vocabulary& vocab,
                                       const PromptOptions& options);

// One query per session, predicting its last event.
std::vector<SftExample> eval_queries(const std::vector<Session>& sessions, const ItemCatalog& catalog,
                                     const SidTable& table, const Vocabulary& vocab, const PromptOptions& options);

// Keeps each candidate with probability reward / max reward; kept examples
// are weighted equally. All-zero rewards give an empty result and a warning.
std::vector<SftExample> sample_sft_examples(const std::vector<SftExample>& candidates, Rng& rng,
                                            std::vector<std::string>* warnings = nullptr);

}  // namespace sidrec
