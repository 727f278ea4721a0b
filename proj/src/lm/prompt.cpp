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

#include "sidrec/lm/prompt.hpp"

#include <algorithm>

#include "sidrec/common/error.hpp"
#include "sidrec/datagen/render.hpp"

namespace sidrec {

SftExample make_sft_example(const Session& session, std::size_t click, const ItemCatalog& catalog,
                            const SidTable& table, const Vocabulary& vocab, const PromptOptions& options) {
  if (click == 0 || click >= session.events.size()) {
    fail(ErrorKind::kIndex, "click position " + std::to_string(click) + " needs a preceding watch in a session of " +
                                std::to_string(session.events.size()));
  }
  SftExample ex;
  ex.prompt.push_back(Vocabulary::kBos);
  const std::size_t context = click - 1;
  if (options.include_history) {
    const std::size_t begin = context > options.max_history ? context - options.max_history : 0;
    for (std::size_t k = begin; k < context; ++k) append_watch(ex.prompt, session.events[k], catalog, table, vocab);
  }
  ex.prompt.push_back(Vocabulary::kBar);
  ex.prompt.push_back(vocab.user_token(session.user_id));
  ex.prompt.push_back(Vocabulary::kBar);
  const auto& ctx = session.events[context];
  const auto ctx_sid = sid_tokens(ctx.item_id, table, vocab);
  ex.prompt.insert(ex.prompt.end(), ctx_sid.begin(), ctx_sid.end());
  ex.prompt.push_back(vocab.channel_token(catalog.at(ctx.item_id).channel));
  ex.prompt.push_back(Vocabulary::kSep);

  const auto& target = session.events[click];
  ex.label = sid_tokens(target.item_id, table, vocab);
  ex.reward = target.reward;
  ex.item_id = target.item_id;
  return ex;
}

std::vector<SftExample> sft_candidates(const std::vector<Session>& sessions, const ItemCatalog& catalog,
                                       const SidTable& table, const Vocabulary& vocab,
                                       const PromptOptions& options) {
  std::vector<SftExample> out;
  for (const auto& s : sessions) {
    for (std::size_t k = 1; k < s.events.size(); ++k) {
      out.push_back(make_sft_example(s, k, catalog, table, vocab, options));
    }
  }
  return out;
}

std::vector<SftExample> eval_queries(const std::vector<Session>& sessions, const ItemCatalog& catalog,
                                     const SidTable& table, const Vocabulary& vocab, const PromptOptions& options) {
  std::vector<SftExample> out;
  for (const auto& s : sessions) {
    if (s.events.size() < 2) continue;
    out.push_back(make_sft_example(s, s.events.size() - 1, catalog, table, vocab, options));
  }
  return out;
}

std::vector<SftExample> sample_sft_examples(const std::vector<SftExample>& candidates, Rng& rng,
                                            std::vector<std::string>* warnings) {
  double max_reward = 0;
  for (const auto& c : candidates) {
    if (!(c.reward >= 0)) fail(ErrorKind::kData, "reward of item " + std::to_string(c.item_id) + " is negative");
    max_reward = std::max(max_reward, c.reward);
  }
  std::vector<SftExample> out;
  if (max_reward == 0) {
    if (warnings != nullptr && !candidates.empty()) {
      warnings->push_back("all " + std::to_string(candidates.size()) + " rewards are zero; no examples sampled");
    }
    return out;
  }
  for (const auto& c : candidates) {
    if (rng.uniform() < c.reward / max_reward) out.push_back(c);
  }
  return out;
}

}  // namespace sidrec
