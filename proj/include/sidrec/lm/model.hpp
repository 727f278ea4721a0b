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
#include <span>
#include <vector>

#include "sidrec/numerics/tape.hpp"

namespace sidrec {

struct ModelDims {
  std::size_t layers = 4;
  std::size_t dim = 128;
  std::size_t heads = 4;
  std::size_t ff = 512;
  std::size_t max_len = 512;

  // Config error unless dim, heads, ff, max_len are positive and heads divides dim.
  void validate() const;
  bool operator==(const ModelDims&) const = default;
};

// Pre-norm block: x += proj(attn(ln1(x))); x += ff2(gelu(ff1(ln2(x)))).
template <typename Real>
struct Block {
  Parameter<Real> ln1_gain, ln1_bias;
  Parameter<Real> qkv_w, qkv_b;
  Parameter<Real> proj_w, proj_b;
  Parameter<Real> ln2_gain, ln2_bias;
  Parameter<Real> ff1_w, ff1_b;
  Parameter<Real> ff2_w, ff2_b;
};

// Decoder-only transformer with learned positions and an output projection
// tied to the token embedding.
template <typename Real>
struct SequenceModel {
  ModelDims dims;
  std::size_t vocab_size = 0;
  Parameter<Real> token_embedding;     // [vocab x dim]
  Parameter<Real> position_embedding;  // [max_len x dim]
  std::vector<Block<Real>> blocks;
  Parameter<Real> final_gain, final_bias;

  SequenceModel() = default;
  SequenceModel(ModelDims d, std::size_t vocab, std::uint64_t seed);

  std::vector<Parameter<Real>*> parameters();
  std::vector<const Parameter<Real>*> parameters() const;

  template <typename To>
  SequenceModel<To> cast() const;
};

// Sequences packed back to back; sequence s spans offsets[s]..offsets[s+1].
struct TokenBatch {
  std::vector<std::uint32_t> tokens;
  std::vector<std::size_t> offsets{0};

  void add(std::span<const std::uint32_t> sequence);
  std::size_t sequences() const { return offsets.size() - 1; }
  std::size_t length(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
};

// Final-norm hidden states [tokens x dim] with parameters on the tape.
// Index error for an unknown token, dimension error for an overlong sequence.
template <typename Real>
Var<Real> hidden_states(Tape<Real>& tape, SequenceModel<Real>& model, const TokenBatch& batch);

// Logits [rows x vocab] for selected hidden rows via the tied embedding.
template <typename Real>
Var<Real> logits_for_rows(Tape<Real>& tape, SequenceModel<Real>& model, Var<Real> hidden,
                          std::span<const std::size_t> rows);

// Inference: logits for every position of every sequence, [tokens x vocab].
template <typename Real>
Tensor<Real> forward_logits(const SequenceModel<Real>& model, const TokenBatch& batch);

// Inference: logits at the last position of each sequence, [sequences x vocab].
template <typename Real>
Tensor<Real> last_logits(const SequenceModel<Real>& model, const TokenBatch& batch);

// Per-layer attention inputs of one prompt, so continuations of it can be
// scored without running the prompt again.
template <typename Real>
struct PromptCache {
  std::size_t length = 0;
  std::vector<Tensor<Real>> layer_qkv;  // per block, [length x 3*dim]
  std::vector<Real> last_logits;        // at the final prompt position
};

template <typename Real>
std::vector<PromptCache<Real>> encode_prompts(const SequenceModel<Real>& model, const TokenBatch& prompts);

// Logits at the last position of prompt[owner[i]] followed by suffix i, one
// row per suffix. Bit-identical to last_logits on the concatenated sequence.
template <typename Real>
Tensor<Real> continuation_logits(const SequenceModel<Real>& model, const std::vector<PromptCache<Real>>& prompts,
                                 std::span<const std::size_t> owner, const TokenBatch& suffixes);

extern template struct SequenceModel<float>;
extern template struct SequenceModel<double>;

}  // namespace sidrec
