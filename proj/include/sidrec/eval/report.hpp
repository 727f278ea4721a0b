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

#include <optional>
#include <string>
#include <vector>

#include "sidrec/eval/metrics.hpp"

namespace sidrec {

struct RunEntry {
  std::string label;
  std::string dir;  // holds metrics.txt
};

struct MetricStats {
  double mean = 0;
  double min = 0;
  double max = 0;
  std::size_t count = 0;
};

struct ReportRow {
  std::string label;
  std::size_t runs = 0;
  std::size_t missing = 0;  // runs without a metrics file
  std::map<std::string, MetricStats> stats;
};

// Metrics shown by default, in column order.
const std::vector<std::string>& report_metrics();

// One row per distinct label in first-seen order, aggregating its runs. A
// missing metrics file or key is counted, never an error.
std::vector<ReportRow> ablation_report(const std::vector<RunEntry>& runs);

// Tab-separated: label, runs, then mean/min/max per metric ("absent" when no
// run of the row reported it).
std::string format_report(const std::vector<ReportRow>& rows,
                          const std::vector<std::string>& metrics = report_metrics());

}  // namespace sidrec
