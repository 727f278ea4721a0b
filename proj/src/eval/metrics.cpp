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

#include "sidrec/eval/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <unordered_set>

#include "sidrec/common/error.hpp"

namespace sidrec {

std::vector<std::uint64_t> resolved_top_k(const RetrievalResult& result, std::size_t k, const SidTable& table,
                                          Rng& rng) {
  if (k > result.ranked.size()) {
    fail(ErrorKind::kConfig, "k = " + std::to_string(k) + " exceeds the " + std::to_string(result.ranked.size()) +
                                 " decoded candidates; raise the beam width");
  }
  std::vector<std::uint64_t> items;
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < k; ++i) {
    const auto item = resolve(result.ranked[i].sid, table, rng);
    if (item && seen.insert(*item).second) items.push_back(*item);
  }
  return items;
}

double recall_at_k(const std::vector<RetrievalResult>& results, const std::vector<std::uint64_t>& truth,
                   std::size_t k, const SidTable& table, std::uint64_t seed) {
  if (results.size() != truth.size()) {
    fail(ErrorKind::kDimension, std::to_string(results.size()) + " results for " + std::to_string(truth.size()) +
                                    " truth items");
  }
  if (results.empty()) fail(ErrorKind::kData, "no queries to evaluate");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < results.size(); ++q) {
    Rng rng = Rng::derive(seed, q);
    const auto items = resolved_top_k(results[q], k, table, rng);
    hits += std::find(items.begin(), items.end(), truth[q]) != items.end() ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double hallucination_rate(const std::vector<RetrievalResult>& results, const SidTable& table) {
  std::size_t total = 0, absent = 0;
  for (const auto& r : results) {
    for (const auto& s : r.ranked) {
      ++total;
      absent += table.items_for(s.sid) == nullptr ? 1 : 0;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(absent) / static_cast<double>(total);
}

std::size_t effective_vocab_size(const std::vector<double>& counts, double coverage) {
  if (!(coverage > 0 && coverage <= 1)) fail(ErrorKind::kConfig, "coverage must be in (0, 1]");
  std::vector<double> sorted(counts);
  double total = 0;
  for (double c : sorted) {
    if (!(c >= 0) || !std::isfinite(c)) fail(ErrorKind::kData, "impression counts must be finite and non-negative");
    total += c;
  }
  if (total == 0) fail(ErrorKind::kData, "impression counts are all zero");
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // The slack absorbs rounding in coverage * total, e.g. 0.95 * 100.
  const double target = coverage * total * (1 - 1e-12);
  double cumulative = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    if (cumulative >= target) return i + 1;
  }
  return sorted.size();
}

void write_metrics(const std::string& path, const MetricMap& metrics) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write metrics " + path);
  for (const auto& [key, value] : metrics) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    out << key << '=' << std::string(buf, res.ptr) << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "failed writing metrics " + path);
}

MetricMap read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open metrics " + path);
  MetricMap out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    double value = 0;
    const char* end = line.data() + line.size();
    if (eq == std::string::npos || std::from_chars(line.data() + eq + 1, end, value).ptr != end) {
      fail(ErrorKind::kData, path + ":" + std::to_string(n) + ": expected key=value");
    }
    out[line.substr(0, eq)] = value;
  }
  return out;
}

}  // namespace sidrec
