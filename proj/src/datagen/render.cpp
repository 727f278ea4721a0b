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

#include "sidrec/datagen/render.hpp"

#include <algorithm>
#include <fstream>

#include "sidrec/common/error.hpp"

namespace sidrec {

VocabSpec vocab_spec_for(const SynthConfig& config, const SidSpec& sid) {
  VocabSpec spec;
  spec.sid_cardinalities = cardinalities(sid);
  spec.channels = static_cast<int>(config.channels);
  spec.title_words = static_cast<int>(config.title_words);
  spec.topics = static_cast<int>(config.topics);
  return spec;
}

std::vector<std::uint32_t> sid_tokens(std::uint64_t item_id, const SidTable& table, const Vocabulary& vocab) {
  const auto* sid = table.find(item_id);
  if (sid == nullptr) fail(ErrorKind::kData, "item " + std::to_string(item_id) + " has no SID");
  std::vector<std::uint32_t> out;
  for (std::size_t l = 0; l < sid->codes.size(); ++l) out.push_back(vocab.sid_token(l, sid->codes[l]));
  return out;
}

void append_watch(std::vector<std::uint32_t>& out, const WatchEvent& event, const ItemCatalog& catalog,
                  const SidTable& table, const Vocabulary& vocab) {
  const auto sid = sid_tokens(event.item_id, table, vocab);
  out.insert(out.end(), sid.begin(), sid.end());
  const auto& spec = vocab.spec();
  out.push_back(vocab.channel_token(catalog.at(event.item_id).channel));
  out.push_back(vocab.ratio_token(ratio_bucket(event.watch_ratio, spec.ratio_buckets)));
  out.push_back(vocab.secs_token(log_bucket(event.watch_seconds, spec.secs_buckets)));
  out.push_back(vocab.hours_token(log_bucket(event.hours_since_final_watch, spec.hours_buckets)));
}

TokenExample render_behavior(const Session& session, std::size_t begin, std::size_t end,
                             const ItemCatalog& catalog, const SidTable& table, const Vocabulary& vocab) {
  if (end > session.events.size() || begin + 1 > end) {
    fail(ErrorKind::kIndex, "behavior window [" + std::to_string(begin) + ", " + std::to_string(end) +
                                ") does not fit a session of " + std::to_string(session.events.size()));
  }
  TokenExample ex{ExampleKind::kBehavior, {}};
  for (std::size_t k = begin; k + 1 < end; ++k) append_watch(ex.tokens, session.events[k], catalog, table, vocab);
  ex.tokens.push_back(Vocabulary::kSep);
  const auto label = sid_tokens(session.events[end - 1].item_id, table, vocab);
  ex.tokens.insert(ex.tokens.end(), label.begin(), label.end());
  return ex;
}

TokenExample render_title(const ItemMeta& meta, const SidTable& table, const Vocabulary& vocab) {
  TokenExample ex{ExampleKind::kMetadata, sid_tokens(meta.item_id, table, vocab)};
  for (auto w : meta.title) ex.tokens.push_back(vocab.word_token(w));
  return ex;
}

TokenExample render_topics(const ItemMeta& meta, const SidTable& table, const Vocabulary& vocab) {
  TokenExample ex{ExampleKind::kMetadata, sid_tokens(meta.item_id, table, vocab)};
  for (auto t : meta.topics) ex.tokens.push_back(vocab.topic_token(t));
  return ex;
}

std::vector<TokenExample> render_cpt_mixture(const std::vector<Session>& sessions,
                                             const std::vector<std::uint64_t>& metadata_items,
                                             const ItemCatalog& catalog, const SidTable& table,
                                             const Vocabulary& vocab, const MixtureOptions& options) {
  const std::size_t behavior = options.examples / 2;
  const std::size_t metadata = options.examples - behavior;
  if (behavior > 0 && sessions.empty()) fail(ErrorKind::kData, "no sessions to render behavior examples from");
  if (metadata > 0 && metadata_items.empty()) fail(ErrorKind::kData, "no items to render metadata examples from");
  Rng rng(options.seed);
  std::vector<TokenExample> out;
  out.reserve(options.examples);
  for (std::size_t i = 0; i < behavior; ++i) {
    const auto& s = sessions[rng.index(sessions.size())];
    const std::size_t end = 2 + rng.index(s.events.size() - 1);
    const std::size_t begin = end - 1 > options.max_history ? end - 1 - options.max_history : 0;
    out.push_back(render_behavior(s, begin, end, catalog, table, vocab));
  }
  for (std::size_t i = 0; i < metadata; ++i) {
    const auto& meta = catalog.at(metadata_items[rng.index(metadata_items.size())]);
    out.push_back(rng.bernoulli(0.5) ? render_title(meta, table, vocab) : render_topics(meta, table, vocab));
  }
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.index(i)]);
  return out;
}

std::vector<std::vector<std::uint32_t>> render_generic_text(const Vocabulary& vocab, std::size_t count,
                                                            std::size_t length, std::uint64_t seed) {
  const auto& spec = vocab.spec();
  const auto topics = static_cast<std::size_t>(spec.topics);
  const auto words = static_cast<std::size_t>(spec.title_words);
  const std::size_t block = words / topics;
  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> out(count);
  for (auto& seq : out) {
    const std::size_t t = rng.index(topics);
    seq.push_back(vocab.topic_token(static_cast<std::uint32_t>(t)));
    for (std::size_t i = 0; i < length; ++i) {
      const bool topical = block > 0 && rng.bernoulli(0.8);
      seq.push_back(vocab.word_token(static_cast<std::uint32_t>(topical ? t * block + rng.index(block) : rng.index(words))));
    }
  }
  return out;
}

void write_token_corpus(const std::string& path, const std::vector<TokenExample>& examples,
                        const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write token corpus " + path);
  for (const auto& ex : examples) out << vocab.render(ex.tokens) << '\n';
  if (!out) fail(ErrorKind::kIo, "failed writing token corpus " + path);
}

std::vector<TokenExample> read_token_corpus(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open token corpus " + path);
  std::vector<TokenExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tokens = vocab.parse(line);
    const bool behavior = std::find(tokens.begin(), tokens.end(), Vocabulary::kSep) != tokens.end();
    out.push_back({behavior ? ExampleKind::kBehavior : ExampleKind::kMetadata, std::move(tokens)});
  }
  return out;
}

}  // namespace sidrec
