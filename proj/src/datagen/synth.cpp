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

#include "sidrec/datagen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr std::size_t kCentroidAttempts = 1000;

// Stored values carry 4 decimals so text files round-trip exactly.
double round4(double x) { return std::round(x * 1e4) / 1e4; }

double exponential(Rng& rng, double mean) { return -mean * std::log(1.0 - rng.uniform()); }

Tensor<float> draw_centroids(std::size_t topics, std::size_t dim, double min_distance, std::size_t modality,
                             Rng& rng) {
  Tensor<float> c(Shape{topics, dim});
  const double min_sq = min_distance * min_distance;
  for (std::size_t t = 0; t < topics; ++t) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kCentroidAttempts && !placed; ++attempt) {
      for (std::size_t j = 0; j < dim; ++j) c(t, j) = static_cast<float>(rng.normal());
      placed = true;
      for (std::size_t u = 0; u < t && placed; ++u) {
        double d = 0;
        for (std::size_t j = 0; j < dim; ++j) {
          const double diff = static_cast<double>(c(t, j)) - c(u, j);
          d += diff * diff;
        }
        placed = d >= min_sq;
      }
    }
    if (!placed) {
      fail(ErrorKind::kConfig, "cannot separate " + std::to_string(topics) + " topic centroids by " +
                                   std::to_string(min_distance) + " in modality " + std::to_string(modality) +
                                   " (dim " + std::to_string(dim) + "); use fewer topics or a larger dim");
    }
  }
  return c;
}

}  // namespace

void SynthConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) fail(ErrorKind::kConfig, std::string("datagen.") + name + " must be positive");
  };
  positive(items, "items");
  positive(topics, "topics");
  positive(sessions, "sessions");
  positive(users, "users");
  positive(channels, "channels");
  positive(title_words, "title_words");
  positive(title_length, "title_length");
  if (modality_dims.empty()) fail(ErrorKind::kConfig, "datagen.modality_dims must list at least one modality");
  for (auto d : modality_dims) positive(d, "modality_dims");
  if (topics > items) fail(ErrorKind::kConfig, "datagen.topics exceeds datagen.items");
  if (min_session < 2) fail(ErrorKind::kConfig, "datagen.min_session must be at least 2");
  if (min_session > max_session) fail(ErrorKind::kConfig, "datagen.min_session exceeds datagen.max_session");
  if (!(stickiness >= 0 && stickiness <= 1)) fail(ErrorKind::kConfig, "datagen.stickiness must lie in [0, 1]");
  if (!(second_topic_prob >= 0 && second_topic_prob <= 1)) {
    fail(ErrorKind::kConfig, "datagen.second_topic_prob must lie in [0, 1]");
  }
  if (!(noise >= 0)) fail(ErrorKind::kConfig, "datagen.noise must be non-negative");
  if (!(mean_gap_hours > 0)) fail(ErrorKind::kConfig, "datagen.mean_gap_hours must be positive");
  if (!(reward_scale >= 0) || !(reward_noise >= 0)) {
    fail(ErrorKind::kConfig, "datagen reward parameters must be non-negative");
  }
}

ItemCatalog::ItemCatalog(std::vector<ItemMeta> meta) : meta_(std::move(meta)) {
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    if (!rows_.emplace(meta_[i].item_id, i).second) {
      fail(ErrorKind::kData, "item " + std::to_string(meta_[i].item_id) + " listed twice in item metadata");
    }
  }
}

const ItemMeta& ItemCatalog::at(std::uint64_t item_id) const {
  auto it = rows_.find(item_id);
  if (it == rows_.end()) fail(ErrorKind::kIndex, "item " + std::to_string(item_id) + " has no metadata");
  return meta_[it->second];
}

SyntheticWorld gen_corpus(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  SyntheticWorld world;
  const std::size_t n = config.items;
  const std::size_t topics = config.topics;

  Rng centroid_rng = Rng::derive(seed, 1);
  for (std::size_t m = 0; m < config.modality_dims.size(); ++m) {
    world.centroids.push_back(draw_centroids(topics, config.modality_dims[m], 4.0 * config.noise, m, centroid_rng));
  }

  Rng topic_rng = Rng::derive(seed, 2);
  world.item_topic.resize(n);
  for (std::size_t i = 0; i < n; ++i) world.item_topic[i] = static_cast<std::uint32_t>(i % topics);
  for (std::size_t i = n; i > 1; --i) std::swap(world.item_topic[i - 1], world.item_topic[topic_rng.index(i)]);

  Rng noise_rng = Rng::derive(seed, 3);
  auto& corpus = world.corpus;
  corpus.dims = config.modality_dims;
  for (std::size_t i = 0; i < n; ++i) corpus.item_ids.push_back(i);
  for (std::size_t m = 0; m < config.modality_dims.size(); ++m) {
    const std::size_t dim = config.modality_dims[m];
    Tensor<float> emb(Shape{n, dim});
    for (std::size_t i = 0; i < n; ++i) {
      const auto centroid = world.centroids[m].row(world.item_topic[i]);
      for (std::size_t j = 0; j < dim; ++j) {
        emb(i, j) = centroid[j] + static_cast<float>(config.noise * noise_rng.normal());
      }
    }
    corpus.modalities.push_back(std::move(emb));
  }

  // Each topic owns a block of title words; the last word of a title is drawn
  // from the whole word list.
  Rng meta_rng = Rng::derive(seed, 4);
  const std::size_t words_per_topic = config.title_words / topics;
  const std::size_t channels_per_topic = std::max<std::size_t>(1, config.channels / topics);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t t = world.item_topic[i];
    ItemMeta meta;
    meta.item_id = corpus.item_ids[i];
    for (std::size_t w = 0; w < config.title_length; ++w) {
      const bool topical = words_per_topic > 0 && w + 1 < config.title_length;
      meta.title.push_back(static_cast<std::uint32_t>(
          topical ? t * words_per_topic + meta_rng.index(words_per_topic) : meta_rng.index(config.title_words)));
    }
    meta.topics.push_back(t);
    if (topics > 1 && meta_rng.bernoulli(config.second_topic_prob)) {
      auto other = static_cast<std::uint32_t>(meta_rng.index(topics - 1));
      meta.topics.push_back(other >= t ? other + 1 : other);
    }
    meta.channel = static_cast<std::uint32_t>((t * config.channels / topics + meta_rng.index(channels_per_topic)) %
                                              config.channels);
    const double duration = std::exp(std::log(300.0) + 0.8 * meta_rng.normal());
    meta.duration_secs = std::round(std::clamp(duration, 10.0, 3600.0) * 10.0) / 10.0;
    world.meta.push_back(std::move(meta));
  }
  return world;
}

std::vector<Session> gen_sessions(const SynthConfig& config, const SyntheticWorld& world, std::uint64_t seed) {
  config.validate();
  std::vector<std::vector<std::size_t>> topic_rows(config.topics);
  for (std::size_t i = 0; i < world.item_topic.size(); ++i) topic_rows[world.item_topic[i]].push_back(i);
  for (const auto& rows : topic_rows) {
    if (rows.empty()) fail(ErrorKind::kData, "a topic has no items; regenerate the corpus");
  }

  Rng rng = Rng::derive(seed, 5);
  std::vector<Session> sessions(config.sessions);
  for (auto& session : sessions) {
    session.user_id = rng.index(config.users);
    const std::size_t len = config.min_session + rng.index(config.max_session - config.min_session + 1);
    std::size_t topic = rng.index(config.topics);
    session.events.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0 && !rng.bernoulli(config.stickiness)) topic = rng.index(config.topics);
      const auto& rows = topic_rows[topic];
      const std::size_t row = rows[rng.index(rows.size())];
      auto& e = session.events[k];
      e.item_id = world.corpus.item_ids[row];
      e.watch_ratio = round4(rng.uniform());
      e.watch_seconds = round4(std::round(e.watch_ratio * world.meta[row].duration_secs * 10.0) / 10.0);
      e.reward = round4(std::max(0.0, config.reward_scale * e.watch_ratio + config.reward_noise * rng.normal()));
    }
    // Gaps between consecutive watches, accumulated from the end.
    double since = 0.0;
    session.events[len - 1].hours_since_final_watch = 0.0;
    for (std::size_t k = len - 1; k-- > 0;) {
      since += round4(exponential(rng, config.mean_gap_hours));
      session.events[k].hours_since_final_watch = round4(since);
    }
  }
  return sessions;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> cooccurrence_pairs(const std::vector<Session>& sessions,
                                                                        std::size_t window) {
  if (window < 1) fail(ErrorKind::kConfig, "co-occurrence window must be at least 1");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  std::set<std::pair<std::uint64_t, std::uint64_t>> local;
  for (const auto& s : sessions) {
    local.clear();
    const auto& ev = s.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      for (std::size_t j = i + 1; j < ev.size() && j - i <= window; ++j) {
        const auto a = ev[i].item_id;
        const auto b = ev[j].item_id;
        if (a != b) local.emplace(std::min(a, b), std::max(a, b));
      }
    }
    out.insert(out.end(), local.begin(), local.end());
  }
  return out;
}

std::vector<ItemPair> to_row_pairs(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs,
                                   const EmbeddingCorpus& corpus) {
  std::unordered_map<std::uint64_t, std::size_t> rows;
  for (std::size_t i = 0; i < corpus.size(); ++i) rows.emplace(corpus.item_ids[i], i);
  auto row = [&](std::uint64_t id) {
    auto it = rows.find(id);
    if (it == rows.end()) fail(ErrorKind::kIndex, "co-occurrence pair references unknown item " + std::to_string(id));
    return it->second;
  };
  std::vector<ItemPair> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back({row(a), row(b)});
  return out;
}

std::pair<std::vector<Session>, std::vector<Session>> split_sessions(const std::vector<Session>& sessions,
                                                                     double fraction) {
  if (!(fraction >= 0 && fraction < 1)) fail(ErrorKind::kConfig, "held-out fraction must lie in [0, 1)");
  const auto held = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(sessions.size())));
  const auto cut = sessions.begin() + static_cast<std::ptrdiff_t>(sessions.size() - held);
  return {std::vector<Session>(sessions.begin(), cut), std::vector<Session>(cut, sessions.end())};
}

}  // namespace sidrec
