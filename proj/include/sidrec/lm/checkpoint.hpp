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

#include "sidrec/lm/model.hpp"
#include "sidrec/lm/vocab.hpp"

namespace sidrec {

struct LmCheckpoint {
  SequenceModel<float> model;
  VocabSpec vocab;
};

// "PLUMLM01", u32 version, u32 range count, per range (u16 name length, name,
// u32 begin, u32 size), then named parameter blocks. The first block,
// "meta.arch", holds layers, dim, heads, ff and max_len.
void save_lm(const std::string& path, const SequenceModel<float>& model, const VocabSpec& vocab);
LmCheckpoint load_lm(const std::string& path);

}  // namespace sidrec
