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
#include <vector>

#include "sidrec/numerics/tensor.hpp"

namespace sidrec {

// One item's M content embeddings.
struct ItemEmbeddingSet {
  std::vector<std::vector<float>> embeddings;
};

// Column-major over modalities: modalities[m] is [items x dims[m]].
struct EmbeddingCorpus {
  std::vector<std::uint64_t> item_ids;
  std::vector<std::size_t> dims;
  std::vector<Tensor<float>> modalities;

  std::size_t size() const { return item_ids.size(); }
  std::size_t modality_count() const { return dims.size(); }
  ItemEmbeddingSet item(std::size_t row) const;
  // Keeps only the first `count` modalities.
  EmbeddingCorpus leading_modalities(std::size_t count) const;
};

}  // namespace sidrec
