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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sidrec {

// Ordered coarse-to-fine codeword tuple; compares lexicographically.
struct SemanticId {
  std::vector<std::uint32_t> codes;

  std::size_t levels() const { return codes.size(); }
  auto operator<=>(const SemanticId&) const = default;
  bool operator==(const SemanticId&) const = default;

  // "c1,c2,...,cL"
  std::string to_string() const;
  static SemanticId parse(std::string_view text);
};

}  // namespace sidrec
