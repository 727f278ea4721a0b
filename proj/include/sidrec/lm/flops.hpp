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

#include <cstddef>

#include "sidrec/lm/model.hpp"

namespace sidrec {

// Parameters outside the token and position tables: every block plus the
// final norm.
std::size_t non_embedding_params(const ModelDims& dims);

// Dense training estimate 6 * N * tokens with N = non_embedding_params +
// vocab * dim. The second term is the tied output projection, which is a
// matmul on every position; the input lookups are free.
double flops_per_step(const ModelDims& dims, std::size_t vocab, std::size_t batch, std::size_t seq_len);

}  // namespace sidrec
