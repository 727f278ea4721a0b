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

#include "sidrec/lm/model.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "sidrec/common/error.hpp"
#include "sidrec/numerics/kernels.hpp"
#include "sidrec/numerics/ops.hpp"
#include "sidrec/numerics/rng.hpp"

namespace sidrec {
namespace {

template <typename Real>
Parameter<Real> gaussian(const std::string& name, Shape shape, double stddev, Rng& rng) {
  Tensor<Real> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<Real>(stddev * rng.normal());
  return Parameter<Real>(name, std::move(t));
}

template <typename Real>
Parameter<Real> filled(const std::string& name, std::size_t n, Real v) {
  return Parameter<Real>(name, Tensor<Real>(Shape{n}, v));
}

void check_token(std::uint32_t token, std::size_t vocab_size) {
  if (token >= vocab_size) {
    fail(ErrorKind::kIndex, "token " + std::to_string(token) + " outside vocabulary of " + std::to_string(vocab_size));
  }
}

// Everything after attention in one block, plus the next block's pre-norm.
template <typename Block, typename Bind, typename VarT>
VarT finish_block(Block& b, Bind&& bind, VarT x, VarT attn) {
  x = ops::add(x, ops::add_bias(ops::matmul(attn, bind(b.proj_w)), bind(b.proj_b)));
  auto h2 = ops::layer_norm(x, bind(b.ln2_gain), bind(b.ln2_bias));
  auto f = ops::gelu(ops::add_bias(ops::matmul(h2, bind(b.ff1_w)), bind(b.ff1_b)));
  return ops::add(x, ops::add_bias(ops::matmul(f, bind(b.ff2_w)), bind(b.ff2_b)));
}

// `layer_qkv`, when given, receives each block's attention input.
template <typename ModelT, typename Bind>
auto hidden_graph(ModelT& model, Bind&& bind, decltype(bind(model.token_embedding)) tokens_table,
                  const TokenBatch& batch, std::vector<std::remove_cvref_t<decltype(tokens_table.value())>>* layer_qkv = nullptr) {
  const auto& dims = model.dims;
  if (batch.offsets.empty() || batch.offsets.front() != 0 || batch.offsets.back() != batch.tokens.size()) {
    fail(ErrorKind::kContract, "token batch offsets do not cover the tokens");
  }
  std::vector<std::size_t> ids(batch.tokens.size());
  std::vector<std::size_t> positions(batch.tokens.size());
  for (std::size_t s = 0; s < batch.sequences(); ++s) {
    const std::size_t len = batch.length(s);
    if (len == 0) fail(ErrorKind::kData, "sequence " + std::to_string(s) + " is empty");
    if (len > dims.max_len) {
      fail(ErrorKind::kDimension, "sequence " + std::to_string(s) + " has " + std::to_string(len) +
                                      " tokens, model maximum is " + std::to_string(dims.max_len));
    }
    for (std::size_t p = 0; p < len; ++p) {
      const std::size_t at = batch.offsets[s] + p;
      check_token(batch.tokens[at], model.vocab_size);
      ids[at] = batch.tokens[at];
      positions[at] = p;
    }
  }

  auto x = ops::add(ops::gather_rows(tokens_table, std::span<const std::size_t>(ids)),
                    ops::gather_rows(bind(model.position_embedding), std::span<const std::size_t>(positions)));
  const std::span<const std::size_t> offsets(batch.offsets);
  for (auto& b : model.blocks) {
    auto h = ops::layer_norm(x, bind(b.ln1_gain), bind(b.ln1_bias));
    auto qkv = ops::add_bias(ops::matmul(h, bind(b.qkv_w)), bind(b.qkv_b));
    if (layer_qkv != nullptr) layer_qkv->push_back(qkv.value());
    x = finish_block(b, bind, x, ops::causal_attention(qkv, offsets, dims.heads));
  }
  return ops::layer_norm(x, bind(model.final_gain), bind(model.final_bias));
}

template <typename Real>
Tensor<Real> copy_rows(const Tensor<Real>& src, std::size_t first, std::size_t count) {
  Tensor<Real> out(Shape{count, src.cols()});
  std::copy(src.data.begin() + static_cast<std::ptrdiff_t>(first * src.cols()),
            src.data.begin() + static_cast<std::ptrdiff_t>((first + count) * src.cols()), out.data.begin());
  return out;
}

template <typename Real>
Tensor<Real> inference_logits(const SequenceModel<Real>& model, const TokenBatch& batch, bool last_only) {
  Tape<Real> tape;
  auto bind = [&tape](const Parameter<Real>& p) { return tape.constant(p.value); };
  auto table = bind(model.token_embedding);
  auto hidden = hidden_graph(model, bind, table, batch);
  if (last_only) {
    std::vector<std::size_t> rows;
    for (std::size_t s = 0; s < batch.sequences(); ++s) rows.push_back(batch.offsets[s + 1] - 1);
    hidden = ops::gather_rows(hidden, std::span<const std::size_t>(rows));
  }
  return ops::matmul_nt(hidden, table).value();
}

}  // namespace

void ModelDims::validate() const {
  if (dim == 0 || heads == 0 || ff == 0 || max_len == 0) {
    fail(ErrorKind::kConfig, "model dim, heads, ff and max_len must be positive");
  }
  if (dim % heads != 0) {
    fail(ErrorKind::kConfig, "model dim " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) +
                                 " heads");
  }
}

void TokenBatch::add(std::span<const std::uint32_t> sequence) {
  tokens.insert(tokens.end(), sequence.begin(), sequence.end());
  offsets.push_back(tokens.size());
}

template <typename Real>
SequenceModel<Real>::SequenceModel(ModelDims d, std::size_t vocab, std::uint64_t seed)
    : dims(d), vocab_size(vocab) {
  dims.validate();
  if (vocab == 0) fail(ErrorKind::kConfig, "vocabulary is empty");
  Rng rng(seed);
  const std::size_t D = dims.dim;
  const double stddev = 0.02;
  // Residual-branch outputs are scaled down with depth.
  const double out_stddev = stddev / std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(1, dims.layers)));
  token_embedding = gaussian<Real>("embed.token", {vocab, D}, stddev, rng);
  position_embedding = gaussian<Real>("embed.position", {dims.max_len, D}, stddev, rng);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::string p = "block." + std::to_string(l) + ".";
    Block<Real> b;
    b.ln1_gain = filled<Real>(p + "ln1.gain", D, Real(1));
    b.ln1_bias = filled<Real>(p + "ln1.bias", D, Real(0));
    b.qkv_w = gaussian<Real>(p + "attn.qkv.w", {D, 3 * D}, stddev, rng);
    b.qkv_b = filled<Real>(p + "attn.qkv.b", 3 * D, Real(0));
    b.proj_w = gaussian<Real>(p + "attn.proj.w", {D, D}, out_stddev, rng);
    b.proj_b = filled<Real>(p + "attn.proj.b", D, Real(0));
    b.ln2_gain = filled<Real>(p + "ln2.gain", D, Real(1));
    b.ln2_bias = filled<Real>(p + "ln2.bias", D, Real(0));
    b.ff1_w = gaussian<Real>(p + "ff.in.w", {D, dims.ff}, stddev, rng);
    b.ff1_b = filled<Real>(p + "ff.in.b", dims.ff, Real(0));
    b.ff2_w = gaussian<Real>(p + "ff.out.w", {dims.ff, D}, out_stddev, rng);
    b.ff2_b = filled<Real>(p + "ff.out.b", D, Real(0));
    blocks.push_back(std::move(b));
  }
  final_gain = filled<Real>("final.gain", D, Real(1));
  final_bias = filled<Real>("final.bias", D, Real(0));
}

template <typename Real>
std::vector<Parameter<Real>*> SequenceModel<Real>::parameters() {
  std::vector<Parameter<Real>*> out{&token_embedding, &position_embedding};
  for (auto& b : blocks) {
    out.insert(out.end(), {&b.ln1_gain, &b.ln1_bias, &b.qkv_w, &b.qkv_b, &b.proj_w, &b.proj_b, &b.ln2_gain,
                           &b.ln2_bias, &b.ff1_w, &b.ff1_b, &b.ff2_w, &b.ff2_b});
  }
  out.push_back(&final_gain);
  out.push_back(&final_bias);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real>*> SequenceModel<Real>::parameters() const {
  auto mut = const_cast<SequenceModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

template <typename Real>
template <typename To>
SequenceModel<To> SequenceModel<Real>::cast() const {
  SequenceModel<To> out;
  out.dims = dims;
  out.vocab_size = vocab_size;
  auto conv = [](const Parameter<Real>& p) { return Parameter<To>(p.name, tensor_cast<To>(p.value)); };
  out.token_embedding = conv(token_embedding);
  out.position_embedding = conv(position_embedding);
  for (const auto& b : blocks) {
    out.blocks.push_back(Block<To>{conv(b.ln1_gain), conv(b.ln1_bias), conv(b.qkv_w), conv(b.qkv_b),
                                   conv(b.proj_w), conv(b.proj_b), conv(b.ln2_gain), conv(b.ln2_bias),
                                   conv(b.ff1_w), conv(b.ff1_b), conv(b.ff2_w), conv(b.ff2_b)});
  }
  out.final_gain = conv(final_gain);
  out.final_bias = conv(final_bias);
  return out;
}

template <typename Real>
Var<Real> hidden_states(Tape<Real>& tape, SequenceModel<Real>& model, const TokenBatch& batch) {
  auto bind = [&tape](Parameter<Real>& p) { return tape.parameter(p); };
  return hidden_graph(model, bind, bind(model.token_embedding), batch);
}

template <typename Real>
Var<Real> logits_for_rows(Tape<Real>& tape, SequenceModel<Real>& model, Var<Real> hidden,
                          std::span<const std::size_t> rows) {
  return ops::matmul_nt(ops::gather_rows(hidden, rows), tape.parameter(model.token_embedding));
}

template <typename Real>
Tensor<Real> forward_logits(const SequenceModel<Real>& model, const TokenBatch& batch) {
  return inference_logits(model, batch, false);
}

template <typename Real>
Tensor<Real> last_logits(const SequenceModel<Real>& model, const TokenBatch& batch) {
  return inference_logits(model, batch, true);
}

template <typename Real>
std::vector<PromptCache<Real>> encode_prompts(const SequenceModel<Real>& model, const TokenBatch& prompts) {
  Tape<Real> tape;
  auto bind = [&tape](const Parameter<Real>& p) { return tape.constant(p.value); };
  auto table = bind(model.token_embedding);
  std::vector<Tensor<Real>> layer_qkv;
  auto hidden = hidden_graph(model, bind, table, prompts, &layer_qkv);
  std::vector<std::size_t> rows;
  for (std::size_t s = 0; s < prompts.sequences(); ++s) rows.push_back(prompts.offsets[s + 1] - 1);
  const auto logits = ops::matmul_nt(ops::gather_rows(hidden, std::span<const std::size_t>(rows)), table).value();

  std::vector<PromptCache<Real>> out(prompts.sequences());
  for (std::size_t s = 0; s < prompts.sequences(); ++s) {
    auto& c = out[s];
    c.length = prompts.length(s);
    for (const auto& qkv : layer_qkv) c.layer_qkv.push_back(copy_rows(qkv, prompts.offsets[s], c.length));
    const auto row = logits.row(s);
    c.last_logits.assign(row.begin(), row.end());
  }
  return out;
}

template <typename Real>
Tensor<Real> continuation_logits(const SequenceModel<Real>& model, const std::vector<PromptCache<Real>>& prompts,
                                 std::span<const std::size_t> owner, const TokenBatch& suffixes) {
  const auto& dims = model.dims;
  const std::size_t n = suffixes.sequences();
  if (owner.size() != n) fail(ErrorKind::kContract, "one prompt owner is needed per suffix");
  std::vector<std::size_t> ids(suffixes.tokens.size()), positions(suffixes.tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] >= prompts.size()) fail(ErrorKind::kIndex, "suffix owner outside the prompt list");
    const auto& cache = prompts[owner[i]];
    if (cache.layer_qkv.size() != model.blocks.size()) fail(ErrorKind::kContract, "prompt cache from another model");
    const std::size_t len = suffixes.length(i);
    if (len == 0) fail(ErrorKind::kData, "suffix " + std::to_string(i) + " is empty");
    if (cache.length + len > dims.max_len) {
      fail(ErrorKind::kDimension, "sequence of " + std::to_string(cache.length + len) +
                                      " tokens exceeds model maximum " + std::to_string(dims.max_len));
    }
    for (std::size_t p = 0; p < len; ++p) {
      const std::size_t at = suffixes.offsets[i] + p;
      check_token(suffixes.tokens[at], model.vocab_size);
      ids[at] = suffixes.tokens[at];
      positions[at] = cache.length + p;
    }
  }

  Tape<Real> tape;
  auto bind = [&tape](const Parameter<Real>& p) { return tape.constant(p.value); };
  auto table = bind(model.token_embedding);
  auto x = ops::add(ops::gather_rows(table, std::span<const std::size_t>(ids)),
                    ops::gather_rows(bind(model.position_embedding), std::span<const std::size_t>(positions)));
  // Attention runs over [prompt rows; suffix rows] per suffix, with the same
  // kernel as the full forward, and only the suffix rows are kept.
  std::vector<std::size_t> joint_offsets{0};
  for (std::size_t i = 0; i < n; ++i) {
    joint_offsets.push_back(joint_offsets.back() + prompts[owner[i]].length + suffixes.length(i));
  }
  const std::size_t width = 3 * dims.dim;
  std::vector<std::size_t> skip;
  for (std::size_t i = 0; i < n; ++i) skip.push_back(prompts[owner[i]].length);
  std::vector<Real> joint(joint_offsets.back() * width), joint_out(joint_offsets.back() * dims.dim);
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    const auto& b = model.blocks[l];
    auto h = ops::layer_norm(x, bind(b.ln1_gain), bind(b.ln1_bias));
    const auto qkv = ops::add_bias(ops::matmul(h, bind(b.qkv_w)), bind(b.qkv_b)).value();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cached = prompts[owner[i]].layer_qkv[l].data;
      auto dst = joint.begin() + static_cast<std::ptrdiff_t>(joint_offsets[i] * width);
      dst = std::copy(cached.begin(), cached.end(), dst);
      std::copy(qkv.data.begin() + static_cast<std::ptrdiff_t>(suffixes.offsets[i] * width),
                qkv.data.begin() + static_cast<std::ptrdiff_t>(suffixes.offsets[i + 1] * width), dst);
    }
    kernels::attention_forward_tail(joint.data(), std::span<const std::size_t>(joint_offsets),
                                    std::span<const std::size_t>(skip), dims.dim, dims.heads, joint_out.data());
    Tensor<Real> attn(Shape{suffixes.tokens.size(), dims.dim});
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(joint_out.begin() + static_cast<std::ptrdiff_t>((joint_offsets[i] + skip[i]) * dims.dim),
                joint_out.begin() + static_cast<std::ptrdiff_t>(joint_offsets[i + 1] * dims.dim),
                attn.data.begin() + static_cast<std::ptrdiff_t>(suffixes.offsets[i] * dims.dim));
    }
    x = finish_block(b, bind, x, tape.constant(std::move(attn)));
  }
  auto hidden = ops::layer_norm(x, bind(model.final_gain), bind(model.final_bias));
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(suffixes.offsets[i + 1] - 1);
  return ops::matmul_nt(ops::gather_rows(hidden, std::span<const std::size_t>(rows)), table).value();
}

template struct SequenceModel<float>;
template struct SequenceModel<double>;
template SequenceModel<double> SequenceModel<float>::cast<double>() const;
template SequenceModel<float> SequenceModel<double>::cast<float>() const;

#define SIDREC_INSTANTIATE_LM(Real)                                                                  \
  template Var<Real> hidden_states<Real>(Tape<Real>&, SequenceModel<Real>&, const TokenBatch&);   \
  template Var<Real> logits_for_rows<Real>(Tape<Real>&, SequenceModel<Real>&, Var<Real>,          \
                                           std::span<const std::size_t>);                          \
  template Tensor<Real> forward_logits<Real>(const SequenceModel<Real>&, const TokenBatch&);       \
  template Tensor<Real> last_logits<Real>(const SequenceModel<Real>&, const TokenBatch&);                    \
  template std::vector<PromptCache<Real>> encode_prompts<Real>(const SequenceModel<Real>&, const TokenBatch&); \
  template Tensor<Real> continuation_logits<Real>(const SequenceModel<Real>&,                                \
                                                  const std::vector<PromptCache<Real>>&,                      \
                                                  std::span<const std::size_t>, const TokenBatch&);

SIDREC_INSTANTIATE_LM(float)
SIDREC_INSTANTIATE_LM(double)

}  // namespace sidrec
