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

#include "sidrec/sid/sid_table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "sidrec/common/error.hpp"

namespace sidrec {

SidTable SidTable::build(std::vector<std::pair<std::uint64_t, SemanticId>> entries) {
  SidTable table;
  for (auto& [item, sid] : entries) {
    if (table.forward_.empty()) {
      table.levels_ = sid.levels();
    } else if (sid.levels() != table.levels_) {
      fail(ErrorKind::kData, "item " + std::to_string(item) + " has a " + std::to_string(sid.levels()) +
                                 "-level SID, expected " + std::to_string(table.levels_));
    }
    if (sid.levels() == 0) fail(ErrorKind::kData, "item " + std::to_string(item) + " has an empty SID");
    auto& bucket = table.inverse_[sid];
    if (!table.forward_.emplace(item, std::move(sid)).second) {
      fail(ErrorKind::kData, "item " + std::to_string(item) + " appears twice in the SID table");
    }
    bucket.push_back(item);
  }
  for (auto& [sid, items] : table.inverse_) std::sort(items.begin(), items.end());
  return table;
}

const SemanticId* SidTable::find(std::uint64_t item_id) const {
  auto it = forward_.find(item_id);
  return it == forward_.end() ? nullptr : &it->second;
}

const std::vector<std::uint64_t>* SidTable::items_for(const SemanticId& sid) const {
  auto it = inverse_.find(sid);
  return it == inverse_.end() ? nullptr : &it->second;
}

void SidTable::check_transpose() const {
  std::size_t listed = 0;
  for (const auto& [sid, items] : inverse_) {
    if (items.empty() || !std::is_sorted(items.begin(), items.end())) {
      fail(ErrorKind::kContract, "SID " + sid.to_string() + " has an empty or unsorted item list");
    }
    for (auto item : items) {
      const auto* fwd = find(item);
      if (fwd == nullptr || *fwd != sid) {
        fail(ErrorKind::kContract, "inverse lists item " + std::to_string(item) + " under SID " + sid.to_string() +
                                       " but the forward map disagrees");
      }
    }
    listed += items.size();
  }
  if (listed != forward_.size()) {
    fail(ErrorKind::kContract, "inverse covers " + std::to_string(listed) + " items, forward has " +
                                   std::to_string(forward_.size()));
  }
}

double uniqueness(const SidTable& table) {
  if (table.empty()) fail(ErrorKind::kData, "uniqueness of an empty SID table is undefined");
  std::size_t unique = 0;
  for (const auto& [sid, items] : table.inverse()) unique += items.size() == 1 ? 1 : 0;
  return static_cast<double>(unique) / static_cast<double>(table.size());
}

std::optional<std::uint64_t> resolve(const SemanticId& sid, const SidTable& table, Rng& rng) {
  const auto* items = table.items_for(sid);
  if (items == nullptr) return std::nullopt;
  if (items->size() == 1) return items->front();
  return (*items)[rng.index(items->size())];
}

void write_sid_table(const std::string& path, const SidTable& table) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write SID table " + path);
  for (const auto& [item, sid] : table.forward()) out << item << '\t' << sid.to_string() << '\n';
  if (!out) fail(ErrorKind::kIo, "failed writing SID table " + path);
}

SidTable read_sid_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open SID table " + path);
  std::vector<std::pair<std::uint64_t, SemanticId>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::uint64_t item = 0;
    const auto [end, ec] = std::from_chars(line.data(), line.data() + (tab == std::string::npos ? 0 : tab), item);
    if (tab == std::string::npos || ec != std::errc() || end != line.data() + tab) {
      fail(ErrorKind::kData, path + ":" + std::to_string(line_no) + ": expected item_id<TAB>codes");
    }
    entries.emplace_back(item, SemanticId::parse(std::string_view(line).substr(tab + 1)));
  }
  return SidTable::build(std::move(entries));
}

}  // namespace sidrec
