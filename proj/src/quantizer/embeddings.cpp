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

#include "sidrec/quantizer/embeddings.hpp"

#include "sidrec/common/error.hpp"

namespace sidrec {

ItemEmbeddingSet EmbeddingCorpus::item(std::size_t row) const {
  ItemEmbeddingSet out;
  for (const auto& m : modalities) {
    auto r = m.row(row);
    out.embeddings.emplace_back(r.begin(), r.end());
  }
  return out;
}

EmbeddingCorpus EmbeddingCorpus::leading_modalities(std::size_t count) const {
  if (count == 0 || count > dims.size()) {
    fail(ErrorKind::kConfig, "cannot keep " + std::to_string(count) + " of " +
                                 std::to_string(dims.size()) + " modalities");
  }
  EmbeddingCorpus out;
  out.item_ids = item_ids;
  out.dims.assign(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(count));
  out.modalities.assign(modalities.begin(), modalities.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace sidrec
