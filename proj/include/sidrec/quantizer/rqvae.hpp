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
#include "sidrec/quantizer/embeddings.hpp"
#include "sidrec/quantizer/sid_spec.hpp"
#include "sidrec/sid/semantic_id.hpp"

namespace sidrec {

struct QuantizerDims {
  std::vector<std::size_t> modality_dims{24, 40};
  std::size_t hidden = 64;
  // Width of each per-modality encoder output z_m.
  std::size_t modality_latent = 16;
  // Width of the fused latent z and of every codeword.
  std::size_t latent = 32;
};

// x -> relu(x W1 + b1) W2 + b2
template <typename Real>
struct Mlp {
  Parameter<Real> w1, b1, w2, b2;
};

template <typename Real>
struct RqVaeModel {
  QuantizerDims dims;
  SidSpec spec;
  std::vector<Mlp<Real>> encoders;
  std::vector<Mlp<Real>> decoders;
  Parameter<Real> fusion_w;
  Parameter<Real> fusion_b;
  // codebooks[l] is [cardinality(l+1) x latent].
  std::vector<Parameter<Real>> codebooks;

  RqVaeModel() = default;
  RqVaeModel(QuantizerDims d, SidSpec s, std::uint64_t seed);

  std::size_t modalities() const { return encoders.size(); }
  std::vector<Parameter<Real>*> parameters();
  std::vector<const Parameter<Real>*> parameters() const;
  // Structural invariants: encoder/decoder counts, codebook shapes, fusion width.
  void validate() const;

  template <typename To>
  RqVaeModel<To> cast() const;
};

// Result of greedy residual quantization. Residuals and code vectors are held
// in double: for float models every subtraction in the chain is exact, so
// z == sum(code_vectors) + residuals[L] holds bit for bit.
struct QuantizationResult {
  SemanticId codewords;
  std::vector<std::vector<double>> residuals;     // r_0 .. r_L
  std::vector<std::vector<double>> code_vectors;  // e^1_* .. e^L_*
  std::vector<double> quantized;                  // masked sum
  int rank = 0;

  std::vector<double> full_quantized() const;
};

// Encodes a batch: modality_batches[m] is [rows x dims[m]], returns [rows x latent].
// Parameters are registered on the tape so the result is differentiable.
template <typename Real>
Var<Real> encode_fuse(Tape<Real>& tape, RqVaeModel<Real>& model,
                      std::span<const Var<Real>> modality_batches);

// Decoder D_m applied to [rows x latent].
template <typename Real>
Var<Real> decode(Tape<Real>& tape, Mlp<Real>& decoder, Var<Real> latent);

// Inference path, no gradient.
template <typename Real>
Tensor<Real> encode_batch(const RqVaeModel<Real>& model, const std::vector<Tensor<Real>>& modality_batches);

// Single item; input error naming the modality on count or width mismatch.
template <typename Real>
std::vector<Real> encode_fuse(const RqVaeModel<Real>& model, const ItemEmbeddingSet& item);

template <typename Real>
QuantizationResult quantize(std::span<const Real> z, const RqVaeModel<Real>& model, int rank);

// Row-wise quantize of a [rows x latent] batch with one shared mask rank.
template <typename Real>
std::vector<QuantizationResult> quantize_batch(const Tensor<Real>& z, const RqVaeModel<Real>& model, int rank);

extern template struct RqVaeModel<float>;
extern template struct RqVaeModel<double>;

}  // namespace sidrec
