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
#include <unordered_map>
#include <utility>
#include <vector>

#include "sidrec/quantizer/embeddings.hpp"
#include "sidrec/quantizer/train.hpp"

namespace sidrec {

struct SynthConfig {
  std::size_t items = 10000;
  std::size_t topics = 50;
  std::vector<std::size_t> modality_dims{24, 40};
  double noise = 0.5;
  std::size_t sessions = 20000;
  std::size_t min_session = 4;
  std::size_t max_session = 20;
  double stickiness = 0.8;
  std::size_t users = 1000;
  std::size_t channels = 100;
  std::size_t title_words = 256;
  std::size_t title_length = 4;
  double second_topic_prob = 0.3;
  double mean_gap_hours = 6.0;
  // reward = max(0, reward_scale * watch_ratio + reward_noise * N(0,1))
  double reward_scale = 1.0;
  double reward_noise = 0.1;
  std::uint64_t seed = 1;

  // Config error on any out-of-range field.
  void validate() const;
};

struct ItemMeta {
  std::uint64_t item_id = 0;
  std::vector<std::uint32_t> title;   // word indices
  std::vector<std::uint32_t> topics;  // primary topic first
  std::uint32_t channel = 0;
  double duration_secs = 0;
};

// Item lookup by id.
class ItemCatalog {
 public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<ItemMeta> meta);
  const std::vector<ItemMeta>& items() const { return meta_; }
  // Index error naming the item when unknown.
  const ItemMeta& at(std::uint64_t item_id) const;
  bool contains(std::uint64_t item_id) const { return rows_.count(item_id) != 0; }

 private:
  std::vector<ItemMeta> meta_;
  std::unordered_map<std::uint64_t, std::size_t> rows_;
};

struct WatchEvent {
  std::uint64_t item_id = 0;
  double watch_ratio = 0;
  double watch_seconds = 0;
  double hours_since_final_watch = 0;
  double reward = 0;
};

struct Session {
  std::uint64_t user_id = 0;
  std::vector<WatchEvent> events;
};

struct SyntheticWorld {
  EmbeddingCorpus corpus;
  std::vector<ItemMeta> meta;  // row-aligned with corpus
  std::vector<std::uint32_t> item_topic;
  std::vector<Tensor<float>> centroids;  // per modality, [topics x dim]
};

// Items get balanced topics; modality m of an item is its topic's centroid
// plus N(0, noise^2) per coordinate. Centroids are redrawn until every pair is
// at least 4 * noise apart.
SyntheticWorld gen_corpus(const SynthConfig& config, std::uint64_t seed);

// Markov topic walk: stay with probability `stickiness`, otherwise jump to a
// uniformly drawn topic (possibly the same one). Items are uniform within the
// topic.
std::vector<Session> gen_sessions(const SynthConfig& config, const SyntheticWorld& world, std::uint64_t seed);

// Unordered (min, max) item-id pairs of distinct items at most `window`
// positions apart, deduplicated within each session.
std::vector<std::pair<std::uint64_t, std::uint64_t>> cooccurrence_pairs(const std::vector<Session>& sessions,
                                                                        std::size_t window);

// Maps item-id pairs onto corpus rows; index error for unknown items.
std::vector<ItemPair> to_row_pairs(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs,
                                   const EmbeddingCorpus& corpus);

// The last `fraction` of sessions are held out.
std::pair<std::vector<Session>, std::vector<Session>> split_sessions(const std::vector<Session>& sessions,
                                                                     double fraction);

}  // namespace sidrec
