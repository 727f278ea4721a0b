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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sidrec/datagen/synth.hpp"
#include "sidrec/eval/beam_search.hpp"
#include "sidrec/lm/train.hpp"
#include "sidrec/quantizer/train.hpp"

namespace sidrec {

// Every hyperparameter of a run. Field defaults are the documented defaults.
struct RunConfig {
  std::uint64_t seed = 1;

  SynthConfig data;
  std::size_t cooc_window = 2;
  double heldout_sessions = 0.1;

  SidSpec sid;
  QuantizerDims quantizer;  // modality_dims follow the data
  QuantizerTrainConfig sid_train;
  bool use_cooccurrence = true;
  bool multi_embedding = true;

  ModelDims lm;

  LmTrainConfig cpt;
  std::size_t cpt_examples = 20000;
  std::size_t cpt_max_history = 8;
  double heldout_items = 0.1;
  std::size_t heldout_examples = 500;

  LmTrainConfig generic;
  std::size_t generic_examples = 10000;

  std::string sft_init = "cpt";  // random | cpt | generic | generic_cpt
  LmTrainConfig sft;
  PromptOptions prompt;
  bool reward_sampling = true;
  std::size_t sft_eval_queries = 200;

  std::size_t beam_width = 10;
  DecodeMode decode_mode = DecodeMode::kFree;
  std::size_t eval_queries = 1000;
  std::vector<std::size_t> recall_ks{1, 10};

  std::string ablate_grid;
  std::vector<std::uint64_t> ablate_seeds{1};

  std::string embeddings_path;  // empty: the run's own data/embeddings.bin

  RunConfig();
  // Config error naming the first offending key.
  void validate() const;
};

struct ConfigField {
  std::string key;  // section.name
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigField>& config_fields();

// Applies `key = value`; config error for an unknown key or a malformed value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// INI file with [section] headers; unknown keys are config errors.
void apply_config_file(RunConfig& config, const std::string& path);

// Every key with its resolved value, grouped by section.
std::string format_config(const RunConfig& config);

// Help text listing every key, its default and a description.
std::string config_help();

}  // namespace sidrec
