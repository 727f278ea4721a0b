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

#include "sidrec/eval/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr std::size_t kQueryGroup = 16;

struct Hyp {
  Beam beam;
  int node = 0;
};

bool better(const Hyp& a, const Hyp& b) {
  if (a.beam.log_prob != b.beam.log_prob) return a.beam.log_prob > b.beam.log_prob;
  return a.beam.codes < b.beam.codes;
}

// Log-softmax over one level's slice of a logit row.
std::vector<double> level_log_probs(std::span<const float> row, std::uint32_t lo, std::uint32_t hi) {
  std::vector<double> out(row.begin() + lo, row.begin() + hi);
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0;
  for (double v : out) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  for (auto& v : out) v -= log_z;
  return out;
}

void check_options(const Vocabulary& vocab, const DecodeOptions& options) {
  if (options.width == 0) fail(ErrorKind::kConfig, "beam width must be at least 1");
  if (options.mode == DecodeMode::kConstrained) {
    if (options.trie == nullptr || options.trie->codes(options.trie->root()).empty()) {
      fail(ErrorKind::kData, "constrained decoding needs a non-empty SID trie");
    }
    if (options.trie->depth() != vocab.sid_levels()) {
      fail(ErrorKind::kDimension, "SID trie has depth " + std::to_string(options.trie->depth()) + ", vocabulary has " +
                                      std::to_string(vocab.sid_levels()) + " levels");
    }
  }
}

void decode_group(const SequenceModel<float>& model, const Vocabulary& vocab,
                  const std::vector<std::vector<std::uint32_t>>& prompts, std::size_t first, std::size_t count,
                  const DecodeOptions& options, std::vector<RetrievalResult>& out) {
  const bool constrained = options.mode == DecodeMode::kConstrained;
  std::vector<std::vector<Hyp>> beams(count, std::vector<Hyp>(1));
  TokenBatch prompt_batch;
  for (std::size_t q = 0; q < count; ++q) prompt_batch.add(prompts[first + q]);
  const auto cache = encode_prompts(model, prompt_batch);
  for (std::size_t level = 0; level < vocab.sid_levels(); ++level) {
    const auto [lo, hi] = vocab.sid_range(level);
    // One logit row per live hypothesis, in beam order.
    Tensor<float> logits;
    if (level == 0) {
      logits = Tensor<float>(Shape{count, model.vocab_size});
      for (std::size_t q = 0; q < count; ++q) {
        std::copy(cache[q].last_logits.begin(), cache[q].last_logits.end(), logits.row(q).begin());
      }
    } else {
      TokenBatch suffixes;
      std::vector<std::size_t> owner;
      std::vector<std::uint32_t> seq;
      for (std::size_t q = 0; q < count; ++q) {
        for (const auto& h : beams[q]) {
          seq.clear();
          for (std::size_t k = 0; k < h.beam.codes.size(); ++k) seq.push_back(vocab.sid_token(k, h.beam.codes[k]));
          suffixes.add(seq);
          owner.push_back(q);
        }
      }
      if (suffixes.sequences() == 0) break;
      logits = continuation_logits(model, cache, std::span<const std::size_t>(owner), suffixes);
    }

    std::size_t row = 0;
    std::vector<std::uint32_t> all_codes(hi - lo);
    for (std::uint32_t c = 0; c < hi - lo; ++c) all_codes[c] = c;
    for (std::size_t q = 0; q < count; ++q) {
      std::vector<Hyp> next;
      for (const auto& h : beams[q]) {
        const auto lp = level_log_probs(logits.row(row++), lo, hi);
        const auto& allowed = constrained ? options.trie->codes(h.node) : all_codes;
        for (auto c : allowed) {
          Hyp child;
          child.beam.codes = h.beam.codes;
          child.beam.codes.push_back(c);
          child.beam.log_prob = h.beam.log_prob + lp[c];
          child.node = constrained ? options.trie->child(h.node, c) : 0;
          next.push_back(std::move(child));
        }
      }
      const std::size_t keep = std::min(options.width, next.size());
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(keep), next.end(), better);
      next.resize(keep);
      beams[q] = std::move(next);
    }
  }
  for (std::size_t q = 0; q < count; ++q) {
    auto& result = out[first + q];
    for (auto& h : beams[q]) {
      if (h.beam.alive && h.beam.codes.size() == vocab.sid_levels()) {
        result.ranked.push_back({SemanticId{std::move(h.beam.codes)}, h.beam.log_prob});
      }
    }
  }
}

}  // namespace

std::vector<RetrievalResult> beam_search_many(const SequenceModel<float>& model, const Vocabulary& vocab,
                                              const std::vector<std::vector<std::uint32_t>>& prompts,
                                              const DecodeOptions& options) {
  check_options(vocab, options);
  if (vocab.size() != model.vocab_size) {
    fail(ErrorKind::kDimension, "model has " + std::to_string(model.vocab_size) + " tokens, vocabulary has " +
                                    std::to_string(vocab.size()));
  }
  std::vector<RetrievalResult> out(prompts.size());
  for (std::size_t first = 0; first < prompts.size(); first += kQueryGroup) {
    decode_group(model, vocab, prompts, first, std::min(kQueryGroup, prompts.size() - first), options, out);
  }
  return out;
}

RetrievalResult beam_search(const SequenceModel<float>& model, const Vocabulary& vocab,
                            std::span<const std::uint32_t> prompt, const DecodeOptions& options) {
  return beam_search_many(model, vocab, {std::vector<std::uint32_t>(prompt.begin(), prompt.end())}, options)[0];
}

double sid_log_prob(const SequenceModel<float>& model, const Vocabulary& vocab, std::span<const std::uint32_t> prompt,
                    const SemanticId& sid) {
  if (sid.codes.size() != vocab.sid_levels()) {
    fail(ErrorKind::kDimension, "SID has " + std::to_string(sid.codes.size()) + " levels, vocabulary has " +
                                    std::to_string(vocab.sid_levels()));
  }
  if (prompt.empty()) fail(ErrorKind::kData, "prompt is empty");
  std::vector<std::uint32_t> seq(prompt.begin(), prompt.end());
  for (std::size_t k = 0; k + 1 < sid.codes.size(); ++k) seq.push_back(vocab.sid_token(k, sid.codes[k]));
  TokenBatch batch;
  batch.add(seq);
  const auto logits = forward_logits(model, batch);
  double total = 0;
  for (std::size_t k = 0; k < sid.codes.size(); ++k) {
    const auto [lo, hi] = vocab.sid_range(k);
    vocab.sid_token(k, sid.codes[k]);  // range check
    total += level_log_probs(logits.row(prompt.size() - 1 + k), lo, hi)[sid.codes[k]];
  }
  return total;
}

}  // namespace sidrec
