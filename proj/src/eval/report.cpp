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

#include "sidrec/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

namespace sidrec {
namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

}  // namespace

const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> names{"sid_uniqueness", "recall@1", "recall@10", "hallucination_rate",
                                              "effective_vocab_size"};
  return names;
}

std::vector<ReportRow> ablation_report(const std::vector<RunEntry>& runs) {
  std::vector<ReportRow> rows;
  for (const auto& run : runs) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.label == run.label; });
    if (it == rows.end()) {
      rows.push_back(ReportRow{run.label, 0, 0, {}});
      it = rows.end() - 1;
    }
    ++it->runs;
    const auto path = (std::filesystem::path(run.dir) / "metrics.txt").string();
    // A leftover marker means the last attempt failed, whatever metrics remain.
    if (!std::filesystem::exists(path) || std::filesystem::exists(std::filesystem::path(run.dir) / ".incomplete")) {
      ++it->missing;
      continue;
    }
    for (const auto& [key, value] : read_metrics(path)) {
      auto& s = it->stats[key];
      if (s.count == 0) {
        s.min = s.max = value;
      } else {
        s.min = std::min(s.min, value);
        s.max = std::max(s.max, value);
      }
      // Running sum, divided once every run is in.
      s.mean += value;
      ++s.count;
    }
  }
  for (auto& row : rows) {
    for (auto& [key, s] : row.stats) s.mean /= static_cast<double>(s.count);
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows, const std::vector<std::string>& metrics) {
  std::string out = "label\truns";
  for (const auto& m : metrics) out += "\t" + m + "_mean\t" + m + "_min\t" + m + "_max";
  out += '\n';
  for (const auto& row : rows) {
    out += row.label + '\t' + std::to_string(row.runs - row.missing) + '/' + std::to_string(row.runs);
    for (const auto& m : metrics) {
      const auto it = row.stats.find(m);
      if (it == row.stats.end()) {
        out += "\tabsent\tabsent\tabsent";
      } else {
        out += '\t' + number(it->second.mean) + '\t' + number(it->second.min) + '\t' + number(it->second.max);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace sidrec
