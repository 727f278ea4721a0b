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
#include <string>
#include <vector>

#include "sidrec/lm/model.hpp"
#include "sidrec/lm/prompt.hpp"

namespace sidrec {

struct LmTrainConfig {
  std::size_t steps = 1000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t eval_every = 100;
  std::uint64_t seed = 1;
};

struct LmLogRecord {
  std::size_t step;
  std::string split;
  double loss;
  double cumulative_flops;
};

struct LmTrainResult {
  std::vector<LmLogRecord> log;
  std::vector<std::string> warnings;
};

// Mean next-token cross-entropy over every position that has a successor.
template <typename Real>
Var<Real> next_token_loss(Tape<Real>& tape, SequenceModel<Real>& model, const TokenBatch& batch);

// Inference version of next_token_loss over many sequences, evaluated in
// chunks without touching the parameters.
double mean_next_token_loss(const SequenceModel<float>& model, const std::vector<std::vector<std::uint32_t>>& seqs);

// Packs examples as prompt + label[0..L-2]; `label_rows` receives the hidden
// row that predicts each label token and `targets` the label tokens. Data
// error when a label token is not a SID token of its level.
TokenBatch pack_sft_batch(const std::vector<const SftExample*>& examples, const Vocabulary& vocab,
                          std::vector<std::size_t>& label_rows, std::vector<std::size_t>& targets);

// Mean cross-entropy over the label positions only.
template <typename Real>
Var<Real> sft_loss(Tape<Real>& tape, SequenceModel<Real>& model, const std::vector<const SftExample*>& examples,
                   const Vocabulary& vocab);

// <bos> tokens <eos>, keeping the tail when longer than max_len.
std::vector<std::uint32_t> wrap_sequence(const std::vector<std::uint32_t>& tokens, std::size_t max_len);

struct CptData {
  std::vector<std::vector<std::uint32_t>> train;  // already wrapped
  std::vector<std::vector<std::uint32_t>> heldout_behavior;
  std::vector<std::vector<std::uint32_t>> heldout_metadata;
};

// Called at step 0, every eval_every steps and after the last step.
using EvalHook = std::function<void(std::size_t step, const SequenceModel<float>& model)>;

// Next-token training on uniformly drawn sequences with a constant learning
// rate. Held-out losses per slice are logged at every evaluation point.
LmTrainResult cpt_train(SequenceModel<float>& model, const CptData& data, const LmTrainConfig& config,
                        const EvalHook& hook = {});

// Label-only training on uniformly drawn examples.
LmTrainResult sft_train(SequenceModel<float>& model, const std::vector<SftExample>& examples,
                        const Vocabulary& vocab, const LmTrainConfig& config, const EvalHook& hook = {});

// "step<TAB>split<TAB>loss<TAB>cumulative_flops" per record.
void write_train_log(const std::string& path, const std::vector<LmLogRecord>& log);

}  // namespace sidrec
