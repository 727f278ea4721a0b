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
#include "sidrec/quantizer/sid_spec.hpp"
#include "sidrec/sid/sid_table.hpp"

namespace sidrec {

VocabSpec vocab_spec_for(const SynthConfig& config, const SidSpec& sid);

enum class ExampleKind { kBehavior, kMetadata };

struct TokenExample {
  ExampleKind kind;
  std::vector<std::uint32_t> tokens;  // without <bos>/<eos>
};

// SID tokens of an item; data error naming the item when it has no SID.
std::vector<std::uint32_t> sid_tokens(std::uint64_t item_id, const SidTable& table, const Vocabulary& vocab);

// Per watched event: SID tokens, channel, ratio, secs and hours buckets.
void append_watch(std::vector<std::uint32_t>& out, const WatchEvent& event, const ItemCatalog& catalog,
                  const SidTable& table, const Vocabulary& vocab);

// Events [begin, end - 1) as watch history, then "||" and the SID of event end - 1.
TokenExample render_behavior(const Session& session, std::size_t begin, std::size_t end,
                             const ItemCatalog& catalog, const SidTable& table, const Vocabulary& vocab);

// SID tokens followed by title words, or by topic tokens.
TokenExample render_title(const ItemMeta& meta, const SidTable& table, const Vocabulary& vocab);
TokenExample render_topics(const ItemMeta& meta, const SidTable& table, const Vocabulary& vocab);

struct MixtureOptions {
  std::size_t examples = 20000;
  std::size_t max_history = 12;
  std::uint64_t seed = 1;
};

// Exactly half behavior examples (random session windows, at most
// max_history watches before the label) and half metadata examples (title or
// topics of random items from `metadata_items`), shuffled together.
std::vector<TokenExample> render_cpt_mixture(const std::vector<Session>& sessions,
                                             const std::vector<std::uint64_t>& metadata_items,
                                             const ItemCatalog& catalog, const SidTable& table,
                                             const Vocabulary& vocab, const MixtureOptions& options);

// SID-free text standing in for a generic pre-training corpus: a topic token
// followed by `length` words, mostly from that topic's word block.
std::vector<std::vector<std::uint32_t>> render_generic_text(const Vocabulary& vocab, std::size_t count,
                                                            std::size_t length, std::uint64_t seed);

// One example per line, space-separated token names. Behavior lines are the
// ones containing "||".
void write_token_corpus(const std::string& path, const std::vector<TokenExample>& examples,
                        const Vocabulary& vocab);
std::vector<TokenExample> read_token_corpus(const std::string& path, const Vocabulary& vocab);

}  // namespace sidrec
