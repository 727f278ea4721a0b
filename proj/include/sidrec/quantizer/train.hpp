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

#include "sidrec/quantizer/losses.hpp"
#include "sidrec/quantizer/rqvae.hpp"

namespace sidrec {

// Row indices into an EmbeddingCorpus.
struct ItemPair {
  std::size_t first;
  std::size_t second;
};

struct QuantizerTrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_pairs = 128;
  double learning_rate = 1e-3;
  std::size_t reseed_every = 500;
  bool kmeans_init = true;
  ContrastiveInput contrastive_input = ContrastiveInput::kQuantized;
  std::uint64_t seed = 1;
};

struct LossRecord {
  std::size_t step;
  LossBreakdown loss;
};

struct QuantizerTrainResult {
  std::vector<LossRecord> history;
  std::vector<std::string> warnings;
};

// Draws N_b pairs whose 2*N_b items are pairwise distinct.
QuantizerBatch<float> sample_pair_batch(const EmbeddingCorpus& corpus, const std::vector<ItemPair>& pairs,
                                        std::size_t batch_pairs, Rng& rng);

// k-means++ seeding, level by level, on the residuals of one batch.
void initialize_codebooks(RqVaeModel<float>& model, const QuantizerBatch<float>& batch, Rng& rng);

// Adam training in place. Reseeds dead codes every `reseed_every` steps and
// warns when a level uses fewer than 5% of its codes over an epoch.
QuantizerTrainResult train_quantizer(RqVaeModel<float>& model, const EmbeddingCorpus& corpus,
                                     const std::vector<ItemPair>& pairs, const QuantizerTrainConfig& config);

void write_loss_history(const std::string& path, const std::vector<LossRecord>& history);

}  // namespace sidrec
