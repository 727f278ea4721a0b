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

#include "sidrec/lm/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sidrec/common/error.hpp"
#include "sidrec/lm/flops.hpp"
#include "sidrec/numerics/adam.hpp"
#include "sidrec/numerics/ops.hpp"

namespace sidrec {
namespace {

constexpr std::size_t kEvalChunk = 64;

void check_config(const LmTrainConfig& config) {
  if (config.batch_size == 0) fail(ErrorKind::kConfig, "batch_size must be positive");
  if (config.eval_every == 0) fail(ErrorKind::kConfig, "eval_every must be positive");
  if (!(config.learning_rate >= 0) || !std::isfinite(config.learning_rate)) {
    fail(ErrorKind::kConfig, "learning_rate must be finite and non-negative");
  }
}

// Shared loop: draw a batch, take one Adam step, call eval at the schedule.
template <typename LossFn, typename EvalFn>
void run_loop(SequenceModel<float>& model, const LmTrainConfig& config, LmTrainResult& result, LossFn&& loss_fn,
              EvalFn&& eval) {
  Rng rng(config.seed);
  AdamState<float> state;
  state.config.learning_rate = config.learning_rate;
  const auto params = model.parameters();
  double flops = 0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (step % config.eval_every == 0) eval(step, flops);
    Tape<float> tape;
    std::size_t tokens = 0;
    auto loss = loss_fn(tape, rng, tokens);
    for (auto* p : params) p->zero_grad();
    tape.backward(loss);
    adam_step(params, state);
    flops += flops_per_step(model.dims, model.vocab_size, 1, tokens);
    result.log.push_back({step + 1, "train", static_cast<double>(loss.value().item()), flops});
  }
  eval(config.steps, flops);
}

}  // namespace

template <typename Real>
Var<Real> next_token_loss(Tape<Real>& tape, SequenceModel<Real>& model, const TokenBatch& batch) {
  std::vector<std::size_t> rows, targets;
  for (std::size_t s = 0; s < batch.sequences(); ++s) {
    for (std::size_t i = batch.offsets[s]; i + 1 < batch.offsets[s + 1]; ++i) {
      rows.push_back(i);
      targets.push_back(batch.tokens[i + 1]);
    }
  }
  if (rows.empty()) fail(ErrorKind::kData, "batch has no next-token targets");
  auto hidden = hidden_states(tape, model, batch);
  auto logits = logits_for_rows(tape, model, hidden, std::span<const std::size_t>(rows));
  return ops::softmax_cross_entropy(logits, std::span<const std::size_t>(targets));
}

double mean_next_token_loss(const SequenceModel<float>& model, const std::vector<std::vector<std::uint32_t>>& seqs) {
  double total = 0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < seqs.size(); start += kEvalChunk) {
    TokenBatch batch;
    for (std::size_t s = start; s < std::min(seqs.size(), start + kEvalChunk); ++s) batch.add(seqs[s]);
    const auto logits = forward_logits(model, batch);
    for (std::size_t s = 0; s < batch.sequences(); ++s) {
      for (std::size_t i = batch.offsets[s]; i + 1 < batch.offsets[s + 1]; ++i) {
        const auto row = logits.row(i);
        double mx = row[0];
        for (float v : row) mx = std::max(mx, static_cast<double>(v));
        double z = 0;
        for (float v : row) z += std::exp(static_cast<double>(v) - mx);
        total += mx + std::log(z) - static_cast<double>(row[batch.tokens[i + 1]]);
        ++count;
      }
    }
  }
  if (count == 0) fail(ErrorKind::kData, "no next-token targets to evaluate");
  return total / static_cast<double>(count);
}

TokenBatch pack_sft_batch(const std::vector<const SftExample*>& examples, const Vocabulary& vocab,
                          std::vector<std::size_t>& label_rows, std::vector<std::size_t>& targets) {
  TokenBatch batch;
  label_rows.clear();
  targets.clear();
  std::vector<std::uint32_t> seq;
  for (const auto* ex : examples) {
    if (ex->prompt.empty() || ex->label.size() != vocab.sid_levels()) {
      fail(ErrorKind::kData, "example for item " + std::to_string(ex->item_id) + " needs a prompt and " +
                                 std::to_string(vocab.sid_levels()) + " label tokens");
    }
    for (std::size_t k = 0; k < ex->label.size(); ++k) {
      const auto [lo, hi] = vocab.sid_range(k);
      if (ex->label[k] < lo || ex->label[k] >= hi) {
        fail(ErrorKind::kData, "label token " + std::to_string(ex->label[k]) + " of item " +
                                   std::to_string(ex->item_id) + " is not a level-" + std::to_string(k + 1) +
                                   " SID token");
      }
    }
    seq.assign(ex->prompt.begin(), ex->prompt.end());
    seq.insert(seq.end(), ex->label.begin(), ex->label.end() - 1);
    const std::size_t base = batch.tokens.size() + ex->prompt.size() - 1;
    for (std::size_t k = 0; k < ex->label.size(); ++k) {
      label_rows.push_back(base + k);
      targets.push_back(ex->label[k]);
    }
    batch.add(seq);
  }
  return batch;
}

template <typename Real>
Var<Real> sft_loss(Tape<Real>& tape, SequenceModel<Real>& model, const std::vector<const SftExample*>& examples,
                   const Vocabulary& vocab) {
  if (examples.empty()) fail(ErrorKind::kData, "SFT batch is empty");
  std::vector<std::size_t> rows, targets;
  const auto batch = pack_sft_batch(examples, vocab, rows, targets);
  auto hidden = hidden_states(tape, model, batch);
  auto logits = logits_for_rows(tape, model, hidden, std::span<const std::size_t>(rows));
  return ops::softmax_cross_entropy(logits, std::span<const std::size_t>(targets));
}

std::vector<std::uint32_t> wrap_sequence(const std::vector<std::uint32_t>& tokens, std::size_t max_len) {
  if (max_len < 3) fail(ErrorKind::kConfig, "max_len must leave room for <bos>, a token and <eos>");
  std::vector<std::uint32_t> out{Vocabulary::kBos};
  const std::size_t keep = std::min(tokens.size(), max_len - 2);
  out.insert(out.end(), tokens.end() - static_cast<std::ptrdiff_t>(keep), tokens.end());
  out.push_back(Vocabulary::kEos);
  return out;
}

LmTrainResult cpt_train(SequenceModel<float>& model, const CptData& data, const LmTrainConfig& config,
                        const EvalHook& hook) {
  check_config(config);
  if (config.steps > 0 && data.train.empty()) fail(ErrorKind::kData, "no continued-pretraining sequences");
  LmTrainResult result;
  auto eval = [&](std::size_t step, double flops) {
    if (!data.heldout_behavior.empty()) {
      result.log.push_back({step, "heldout_behavior", mean_next_token_loss(model, data.heldout_behavior), flops});
    }
    if (!data.heldout_metadata.empty()) {
      result.log.push_back({step, "heldout_metadata", mean_next_token_loss(model, data.heldout_metadata), flops});
    }
    if (hook) hook(step, model);
  };
  auto loss_fn = [&](Tape<float>& tape, Rng& rng, std::size_t& tokens) {
    TokenBatch batch;
    for (std::size_t i = 0; i < config.batch_size; ++i) batch.add(data.train[rng.index(data.train.size())]);
    tokens = batch.tokens.size();
    return next_token_loss(tape, model, batch);
  };
  run_loop(model, config, result, loss_fn, eval);
  return result;
}

LmTrainResult sft_train(SequenceModel<float>& model, const std::vector<SftExample>& examples,
                        const Vocabulary& vocab, const LmTrainConfig& config, const EvalHook& hook) {
  check_config(config);
  if (config.steps > 0 && examples.empty()) fail(ErrorKind::kData, "no fine-tuning examples");
  LmTrainResult result;
  auto eval = [&](std::size_t step, double) {
    if (hook) hook(step, model);
  };
  std::vector<const SftExample*> picked;
  auto loss_fn = [&](Tape<float>& tape, Rng& rng, std::size_t& tokens) {
    picked.clear();
    tokens = 0;
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      picked.push_back(&examples[rng.index(examples.size())]);
      tokens += picked.back()->prompt.size() + picked.back()->label.size() - 1;
    }
    return sft_loss(tape, model, picked, vocab);
  };
  run_loop(model, config, result, loss_fn, eval);
  return result;
}

void write_train_log(const std::string& path, const std::vector<LmLogRecord>& log) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write training log " + path);
  char line[256];
  for (const auto& r : log) {
    std::snprintf(line, sizeof line, "%zu\t%s\t%.9g\t%.9g\n", r.step, r.split.c_str(), r.loss, r.cumulative_flops);
    out << line;
  }
  if (!out) fail(ErrorKind::kIo, "failed writing training log " + path);
}

template Var<float> next_token_loss<float>(Tape<float>&, SequenceModel<float>&, const TokenBatch&);
template Var<double> next_token_loss<double>(Tape<double>&, SequenceModel<double>&, const TokenBatch&);
template Var<float> sft_loss<float>(Tape<float>&, SequenceModel<float>&, const std::vector<const SftExample*>&,
                                    const Vocabulary&);
template Var<double> sft_loss<double>(Tape<double>&, SequenceModel<double>&, const std::vector<const SftExample*>&,
                                      const Vocabulary&);

}  // namespace sidrec
