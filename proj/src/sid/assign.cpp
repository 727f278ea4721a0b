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

#include "sidrec/sid/assign.hpp"

#include <algorithm>

#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr std::size_t kChunkRows = 1024;

}  // namespace

SidTable assign_sids(const RqVaeModel<float>& model, const EmbeddingCorpus& corpus) {
  if (corpus.size() == 0) return {};
  const std::string first = "item " + std::to_string(corpus.item_ids.front());
  if (corpus.modality_count() != model.modalities()) {
    fail(ErrorKind::kData, first + ": " + std::to_string(corpus.modality_count()) + " modalities, model expects " +
                               std::to_string(model.modalities()));
  }
  for (std::size_t m = 0; m < corpus.modality_count(); ++m) {
    if (corpus.dims[m] != model.dims.modality_dims[m]) {
      fail(ErrorKind::kDimension, first + ": modality " + std::to_string(m) + " has width " +
                                      std::to_string(corpus.dims[m]) + ", model expects " +
                                      std::to_string(model.dims.modality_dims[m]));
    }
  }

  std::vector<std::pair<std::uint64_t, SemanticId>> entries;
  entries.reserve(corpus.size());
  for (std::size_t start = 0; start < corpus.size(); start += kChunkRows) {
    const std::size_t rows = std::min(kChunkRows, corpus.size() - start);
    std::vector<Tensor<float>> chunk;
    for (std::size_t m = 0; m < corpus.modality_count(); ++m) {
      const std::size_t dim = corpus.dims[m];
      const auto* base = corpus.modalities[m].data.data() + start * dim;
      chunk.emplace_back(Shape{rows, dim}, std::vector<float>(base, base + rows * dim));
    }
    const auto results = quantize_batch(encode_batch(model, chunk), model, model.spec.levels);
    for (std::size_t i = 0; i < rows; ++i) {
      entries.emplace_back(corpus.item_ids[start + i], results[i].codewords);
    }
  }
  return SidTable::build(std::move(entries));
}

}  // namespace sidrec
