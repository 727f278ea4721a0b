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

#include "sidrec/sid/sid_trie.hpp"

#include <algorithm>

namespace sidrec {

SidTrie::SidTrie() : nodes_(1) {}

SidTrie SidTrie::build(const SidTable& table) {
  SidTrie trie;
  trie.depth_ = table.levels();
  // The inverse map iterates SIDs in lexicographic order, so every node's
  // codes arrive sorted and new children are always appended.
  for (const auto& [sid, items] : table.inverse()) {
    int node = 0;
    for (auto code : sid.codes) {
      auto& n = trie.nodes_[static_cast<std::size_t>(node)];
      if (!n.codes.empty() && n.codes.back() == code) {
        node = n.children.back();
        continue;
      }
      const int next = static_cast<int>(trie.nodes_.size());
      n.codes.push_back(code);
      n.children.push_back(next);
      trie.nodes_.emplace_back();
      node = next;
    }
  }
  return trie;
}

int SidTrie::child(int node, std::uint32_t code) const {
  const auto& n = nodes_[static_cast<std::size_t>(node)];
  auto it = std::lower_bound(n.codes.begin(), n.codes.end(), code);
  if (it == n.codes.end() || *it != code) return kNone;
  return n.children[static_cast<std::size_t>(it - n.codes.begin())];
}

int SidTrie::walk(std::span<const std::uint32_t> prefix) const {
  int node = root();
  for (auto code : prefix) {
    node = child(node, code);
    if (node == kNone) return kNone;
  }
  return node;
}

bool SidTrie::contains_prefix(std::span<const std::uint32_t> prefix) const {
  if (nodes_.size() == 1) return false;
  return walk(prefix) != kNone;
}

}  // namespace sidrec
