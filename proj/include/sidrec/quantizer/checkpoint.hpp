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

#include <string>

#include "sidrec/quantizer/rqvae.hpp"

namespace sidrec {

// "PLUMQ001", u32 M, d, L, base_cardinality, then named parameter blocks.
void save_quantizer(const std::string& path, const RqVaeModel<float>& model);

// Loss coefficients and mask settings are not stored; they come from `spec`,
// whose structural fields (levels, base cardinality, schedule) are overwritten
// from the file.
RqVaeModel<float> load_quantizer(const std::string& path, SidSpec spec = {});

}  // namespace sidrec
