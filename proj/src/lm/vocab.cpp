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

#include "sidrec/lm/vocab.hpp"

#include <algorithm>
#include <cmath>

#include "sidrec/common/error.hpp"

namespace sidrec {

Vocabulary::Vocabulary(VocabSpec spec) : spec_(std::move(spec)) {
  if (spec_.sid_cardinalities.empty()) fail(ErrorKind::kConfig, "vocabulary needs at least one SID level");
  for (const auto& [label, n] : {std::pair<const char*, int>{"ratio buckets", spec_.ratio_buckets},
                                 {"secs buckets", spec_.secs_buckets},
                                 {"hours buckets", spec_.hours_buckets},
                                 {"channels", spec_.channels},
                                 {"user buckets", spec_.user_buckets},
                                 {"title words", spec_.title_words},
                                 {"topics", spec_.topics}}) {
    if (n < 1) fail(ErrorKind::kConfig, std::string("vocabulary: ") + label + " must be positive");
  }
  ranges_.push_back({"control", 0, 5});
  for (const char* name : {"<pad>", "<bos>", "||", "<eos>", "|"}) {
    ids_.emplace(name, static_cast<std::uint32_t>(names_.size()));
    names_.emplace_back(name);
  }
  for (std::size_t l = 0; l < spec_.sid_cardinalities.size(); ++l) {
    const auto level = std::to_string(l + 1);
    add_range("sid" + level, "s" + level + "_", spec_.sid_cardinalities[l]);
  }
  add_range("ratio", "ratio_", spec_.ratio_buckets);
  add_range("secs", "secs_", spec_.secs_buckets);
  add_range("hours", "hours_", spec_.hours_buckets);
  add_range("channel", "ch_", spec_.channels);
  add_range("user", "user_", spec_.user_buckets);
  add_range("word", "w_", spec_.title_words);
  add_range("topic", "topic_", spec_.topics);
}

std::uint32_t Vocabulary::add_range(const std::string& range, const std::string& prefix, int count) {
  if (count < 1) fail(ErrorKind::kConfig, "vocabulary range " + range + " must be non-empty");
  const auto begin = static_cast<std::uint32_t>(names_.size());
  for (int i = 0; i < count; ++i) {
    auto name = prefix + std::to_string(i);
    ids_.emplace(name, static_cast<std::uint32_t>(names_.size()));
    names_.push_back(std::move(name));
  }
  ranges_.push_back({range, begin, static_cast<std::uint32_t>(count)});
  return begin;
}

VocabSpec Vocabulary::spec_from_ranges(const std::vector<Range>& ranges) {
  VocabSpec spec;
  spec.sid_cardinalities.clear();
  std::uint32_t next = 0;
  for (const auto& r : ranges) {
    if (r.begin != next) fail(ErrorKind::kData, "vocabulary manifest range " + r.name + " is not contiguous");
    next += r.size;
    const int n = static_cast<int>(r.size);
    if (r.name == "control") {
      if (r.size != 5) fail(ErrorKind::kData, "vocabulary manifest: control range must hold 5 tokens");
    } else if (r.name.rfind("sid", 0) == 0) {
      if (r.name != "sid" + std::to_string(spec.sid_cardinalities.size() + 1)) {
        fail(ErrorKind::kData, "vocabulary manifest: unexpected SID range " + r.name);
      }
      spec.sid_cardinalities.push_back(n);
    } else if (r.name == "ratio") {
      spec.ratio_buckets = n;
    } else if (r.name == "secs") {
      spec.secs_buckets = n;
    } else if (r.name == "hours") {
      spec.hours_buckets = n;
    } else if (r.name == "channel") {
      spec.channels = n;
    } else if (r.name == "user") {
      spec.user_buckets = n;
    } else if (r.name == "word") {
      spec.title_words = n;
    } else if (r.name == "topic") {
      spec.topics = n;
    } else {
      fail(ErrorKind::kData, "vocabulary manifest: unknown range " + r.name);
    }
  }
  Vocabulary check(spec);
  if (check.ranges().size() != ranges.size()) fail(ErrorKind::kData, "vocabulary manifest is incomplete");
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (check.ranges()[i].name != ranges[i].name) {
      fail(ErrorKind::kData, "vocabulary manifest range " + ranges[i].name + " is out of order");
    }
  }
  return spec;
}

const Vocabulary::Range& Vocabulary::range(const std::string& name) const {
  for (const auto& r : ranges_) {
    if (r.name == name) return r;
  }
  fail(ErrorKind::kContract, "vocabulary has no range " + name);
}

std::uint32_t Vocabulary::in_range(const std::string& name, int index) const {
  const auto& r = range(name);
  if (index < 0 || static_cast<std::uint32_t>(index) >= r.size) {
    fail(ErrorKind::kIndex, name + " token index " + std::to_string(index) + " outside [0, " +
                                std::to_string(r.size) + ")");
  }
  return r.begin + static_cast<std::uint32_t>(index);
}

std::uint32_t Vocabulary::sid_token(std::size_t level, std::uint32_t code) const {
  if (level >= sid_levels()) fail(ErrorKind::kIndex, "SID level " + std::to_string(level + 1) + " out of range");
  return in_range("sid" + std::to_string(level + 1), static_cast<int>(code));
}

std::pair<std::uint32_t, std::uint32_t> Vocabulary::sid_range(std::size_t level) const {
  if (level >= sid_levels()) fail(ErrorKind::kIndex, "SID level " + std::to_string(level + 1) + " out of range");
  const auto& r = ranges_[level + 1];
  return {r.begin, r.begin + r.size};
}

bool Vocabulary::is_sid_token(std::uint32_t id) const {
  const auto& first = ranges_[1];
  const auto& last = ranges_[sid_levels()];
  return id >= first.begin && id < last.begin + last.size;
}

std::pair<std::size_t, std::uint32_t> Vocabulary::sid_code(std::uint32_t id) const {
  for (std::size_t l = 0; l < sid_levels(); ++l) {
    const auto& r = ranges_[l + 1];
    if (id >= r.begin && id < r.begin + r.size) return {l, id - r.begin};
  }
  fail(ErrorKind::kData, "token " + std::to_string(id) + " is not a SID token");
}

std::uint32_t Vocabulary::channel_token(std::uint32_t channel) const {
  return in_range("channel", static_cast<int>(channel));
}

std::uint32_t Vocabulary::user_token(std::uint64_t user_id) const {
  return range("user").begin + static_cast<std::uint32_t>(user_id % static_cast<std::uint64_t>(spec_.user_buckets));
}

const std::string& Vocabulary::name(std::uint32_t id) const {
  if (id >= names_.size()) fail(ErrorKind::kIndex, "token id " + std::to_string(id) + " outside vocabulary");
  return names_[id];
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::id(std::string_view name) const {
  auto found = find(name);
  if (!found) fail(ErrorKind::kData, "unknown token '" + std::string(name) + "'");
  return *found;
}

std::string Vocabulary::render(const std::vector<std::uint32_t>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += name(ids[i]);
  }
  return out;
}

std::vector<std::uint32_t> Vocabulary::parse(std::string_view line) const {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto end = std::min(line.find(' ', pos), line.size());
    if (end > pos) out.push_back(id(line.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

int ratio_bucket(double ratio, int buckets) {
  const double scaled = std::floor(ratio * buckets);
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(buckets - 1)));
}

int log_bucket(double x, int buckets) {
  const double b = std::floor(std::log2(1.0 + std::max(0.0, x)));
  return static_cast<int>(std::clamp(b, 0.0, static_cast<double>(buckets - 1)));
}

}  // namespace sidrec
