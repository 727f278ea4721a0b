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

#include <iosfwd>
#include <string>
#include <vector>

#include "sidrec/cli/config.hpp"
#include "sidrec/eval/report.hpp"

namespace sidrec {

// Fixed run directory layout.
struct RunPaths {
  explicit RunPaths(std::string root);

  std::string root;
  std::string data(const std::string& leaf) const { return root + "/data/" + leaf; }
  std::string checkpoint(const std::string& leaf) const { return root + "/checkpoints/" + leaf; }
  std::string log(const std::string& leaf) const { return root + "/logs/" + leaf; }
  std::string decode(const std::string& leaf) const { return root + "/decode/" + leaf; }
  std::string metrics() const { return root + "/metrics.txt"; }
  std::string resolved_config() const { return root + "/config.resolved"; }
  std::string sentinel() const { return root + "/.incomplete"; }

  // Creates every subdirectory.
  void create() const;
};

// Each stage reads the outputs of earlier stages from the run directory.
void stage_datagen(const RunConfig& config, const RunPaths& run);
void stage_sid_train(const RunConfig& config, const RunPaths& run);
void stage_sid_assign(const RunConfig& config, const RunPaths& run);
// Continued pre-training; runs generic pre-training first when sft.init is
// generic_cpt.
void stage_lm_cpt(const RunConfig& config, const RunPaths& run);
// Generic text pre-training on its own (sft.init = generic).
void stage_lm_generic(const RunConfig& config, const RunPaths& run);
void stage_lm_sft(const RunConfig& config, const RunPaths& run);
void stage_decode(const RunConfig& config, const RunPaths& run);
MetricMap stage_eval(const RunConfig& config, const RunPaths& run);

// Every stage in order; the LM pre-training stages run as sft.init requires.
MetricMap run_pipeline(const RunConfig& config, const RunPaths& run);

struct GridCell {
  std::string label;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// "a.b=x|y;c.d=u|v" -> the cartesian product, first axis slowest. Config error
// on malformed axes.
std::vector<GridCell> expand_grid(const std::string& grid);

// Runs the pipeline for every cell and seed under <run>/runs/<label>_seed<s>,
// then writes <run>/report.tsv and echoes it to `out`.
std::vector<ReportRow> run_ablate(const RunConfig& config, const RunPaths& run, std::ostream& out);

// Writes config.resolved, marks the run incomplete, runs `command` and clears
// the marker on success.
void run_command(const std::string& command, const RunConfig& config, const RunPaths& run, std::ostream& out);

}  // namespace sidrec
