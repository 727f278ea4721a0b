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
#include <vector>

#include "sidrec/datagen/synth.hpp"

namespace sidrec {

// "PLUMEMB1", u32 item count, u32 M, u32 dims[M], then per item a u64 id and
// the concatenated f32 embeddings.
void write_embeddings(const std::string& path, const EmbeddingCorpus& corpus);
EmbeddingCorpus read_embeddings(const std::string& path);

// "user_id<TAB>item:ratio:secs:hours:reward;..." per session. Generated values
// carry at most 4 decimals, so the text round-trips exactly.
void write_sessions(const std::string& path, const std::vector<Session>& sessions);
std::vector<Session> read_sessions(const std::string& path);

// "item_id<TAB>channel<TAB>duration<TAB>t1,t2<TAB>w1 w2 ..." per item.
void write_item_meta(const std::string& path, const std::vector<ItemMeta>& meta);
std::vector<ItemMeta> read_item_meta(const std::string& path);

}  // namespace sidrec
