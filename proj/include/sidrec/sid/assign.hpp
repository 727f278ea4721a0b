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

#include "sidrec/quantizer/embeddings.hpp"
#include "sidrec/quantizer/rqvae.hpp"
#include "sidrec/sid/sid_table.hpp"

namespace sidrec {

// Full-mask quantization of every corpus item. Raises an error naming the
// first item when the corpus layout does not match the model.
SidTable assign_sids(const RqVaeModel<float>& model, const EmbeddingCorpus& corpus);

}  // namespace sidrec
