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

#include "sidrec/lm/flops.hpp"

namespace sidrec {

std::size_t non_embedding_params(const ModelDims& dims) {
  const std::size_t D = dims.dim;
  const std::size_t F = dims.ff;
  const std::size_t per_block = 2 * D          // first norm
                                + 3 * D * D + 3 * D  // fused query/key/value projection
                                + D * D + D          // attention output
                                + 2 * D              // second norm
                                + D * F + F          // feed-forward in
                                + F * D + D;         // feed-forward out
  return dims.layers * per_block + 2 * D;
}

double flops_per_step(const ModelDims& dims, std::size_t vocab, std::size_t batch, std::size_t seq_len) {
  const double n = static_cast<double>(non_embedding_params(dims)) + static_cast<double>(vocab * dims.dim);
  return 6.0 * n * static_cast<double>(batch) * static_cast<double>(seq_len);
}

}  // namespace sidrec
