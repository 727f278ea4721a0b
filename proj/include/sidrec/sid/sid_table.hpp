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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sidrec/numerics/rng.hpp"
#include "sidrec/sid/semantic_id.hpp"

namespace sidrec {

// item_id -> SemanticId with its inverse. Collisions are kept: several items
// may share one SID.
class SidTable {
 public:
  SidTable() = default;

  // Data error on a repeated item id or SIDs of different lengths.
  static SidTable build(std::vector<std::pair<std::uint64_t, SemanticId>> entries);

  std::size_t size() const { return forward_.size(); }
  bool empty() const { return forward_.empty(); }
  // 0 for an empty table.
  std::size_t levels() const { return levels_; }

  const std::map<std::uint64_t, SemanticId>& forward() const { return forward_; }
  // Item lists are sorted ascending.
  const std::map<SemanticId, std::vector<std::uint64_t>>& inverse() const { return inverse_; }

  const SemanticId* find(std::uint64_t item_id) const;
  const std::vector<std::uint64_t>* items_for(const SemanticId& sid) const;
  bool contains(const SemanticId& sid) const { return inverse_.count(sid) != 0; }

  // Contract error unless the inverse is exactly the transpose of the forward map.
  void check_transpose() const;

 private:
  std::map<std::uint64_t, SemanticId> forward_;
  std::map<SemanticId, std::vector<std::uint64_t>> inverse_;
  std::size_t levels_ = 0;
};

// Share of items whose SID maps back to them alone. Data error when empty.
double uniqueness(const SidTable& table);

// nullopt when the SID is absent; a uniform pick among colliding items otherwise.
std::optional<std::uint64_t> resolve(const SemanticId& sid, const SidTable& table, Rng& rng);

// Lines "item_id<TAB>c1,...,cL" sorted by item id.
void write_sid_table(const std::string& path, const SidTable& table);
SidTable read_sid_table(const std::string& path);

}  // namespace sidrec
