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
#include <span>
#include <vector>

#include "sidrec/sid/sid_table.hpp"

namespace sidrec {

// Prefix tree over the SIDs of a table, used to keep beam search on valid
// codeword paths.
class SidTrie {
 public:
  static constexpr int kNone = -1;

  SidTrie();
  static SidTrie build(const SidTable& table);

  int root() const { return 0; }
  // Child node reached by `code`, or kNone.
  int child(int node, std::uint32_t code) const;
  // Codes leaving `node`, ascending.
  const std::vector<std::uint32_t>& codes(int node) const { return nodes_[static_cast<std::size_t>(node)].codes; }
  // Node for a prefix, or kNone.
  int walk(std::span<const std::uint32_t> prefix) const;
  // The empty prefix counts only when the trie holds at least one SID.
  bool contains_prefix(std::span<const std::uint32_t> prefix) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t depth() const { return depth_; }

 private:
  struct Node {
    std::vector<std::uint32_t> codes;
    std::vector<int> children;
  };
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
};

}  // namespace sidrec
