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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sidrec {

struct VocabSpec {
  std::vector<int> sid_cardinalities{64, 32, 16, 8};
  int ratio_buckets = 10;
  int secs_buckets = 16;
  int hours_buckets = 16;
  int channels = 100;
  int user_buckets = 8;
  int title_words = 256;
  int topics = 50;

  bool operator==(const VocabSpec&) const = default;
};

// Token ids laid out as contiguous disjoint ranges, in this order:
//   control  <pad> <bos> || <eos> |
//   sid1..sidL  s{l}_{c}
//   ratio, secs, hours  numeric feature buckets
//   channel ch_{c}, user user_{u}, word w_{i}, topic topic_{t}
class Vocabulary {
 public:
  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kBos = 1;
  static constexpr std::uint32_t kSep = 2;  // "||", precedes the label SID
  static constexpr std::uint32_t kEos = 3;
  static constexpr std::uint32_t kBar = 4;  // "|", separates prompt fields

  struct Range {
    std::string name;
    std::uint32_t begin = 0;
    std::uint32_t size = 0;
  };

  Vocabulary() = default;
  explicit Vocabulary(VocabSpec spec);

  const VocabSpec& spec() const { return spec_; }
  std::size_t size() const { return names_.size(); }
  std::size_t sid_levels() const { return spec_.sid_cardinalities.size(); }
  const std::vector<Range>& ranges() const { return ranges_; }
  // Inverse of ranges(); data error on an unknown or misordered manifest.
  static VocabSpec spec_from_ranges(const std::vector<Range>& ranges);

  // `level` is 0-based. Index error when level or code is out of range.
  std::uint32_t sid_token(std::size_t level, std::uint32_t code) const;
  // [begin, end) of the level's SID tokens.
  std::pair<std::uint32_t, std::uint32_t> sid_range(std::size_t level) const;
  bool is_sid_token(std::uint32_t id) const;
  // (level, code) for a SID token; data error otherwise.
  std::pair<std::size_t, std::uint32_t> sid_code(std::uint32_t id) const;

  std::uint32_t ratio_token(int bucket) const { return in_range("ratio", bucket); }
  std::uint32_t secs_token(int bucket) const { return in_range("secs", bucket); }
  std::uint32_t hours_token(int bucket) const { return in_range("hours", bucket); }
  std::uint32_t channel_token(std::uint32_t channel) const;
  std::uint32_t user_token(std::uint64_t user_id) const;
  std::uint32_t word_token(std::uint32_t word) const { return in_range("word", static_cast<int>(word)); }
  std::uint32_t topic_token(std::uint32_t topic) const { return in_range("topic", static_cast<int>(topic)); }

  const std::string& name(std::uint32_t id) const;
  std::optional<std::uint32_t> find(std::string_view name) const;
  // Data error naming the token when unknown.
  std::uint32_t id(std::string_view name) const;

  std::string render(const std::vector<std::uint32_t>& ids) const;
  std::vector<std::uint32_t> parse(std::string_view line) const;

 private:
  std::uint32_t add_range(const std::string& range, const std::string& prefix, int count);
  std::uint32_t in_range(const std::string& range, int index) const;
  const Range& range(const std::string& name) const;

  VocabSpec spec_;
  std::vector<Range> ranges_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// floor(ratio * buckets), clamped to [0, buckets - 1].
int ratio_bucket(double ratio, int buckets);
// floor(log2(1 + x)), clamped to [0, buckets - 1].
int log_bucket(double x, int buckets);

}  // namespace sidrec
