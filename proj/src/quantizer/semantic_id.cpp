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

#include "sidrec/sid/semantic_id.hpp"

#include <charconv>

#include "sidrec/common/error.hpp"

namespace sidrec {

std::string SemanticId::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(codes[i]);
  }
  return out;
}

SemanticId SemanticId::parse(std::string_view text) {
  SemanticId sid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::uint32_t value = 0;
    const char* first = text.data() + pos;
    const char* last = text.data() + comma;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
      fail(ErrorKind::kData, "malformed semantic id '" + std::string(text) + "'");
    }
    sid.codes.push_back(value);
    pos = comma + 1;
  }
  return sid;
}

}  // namespace sidrec
