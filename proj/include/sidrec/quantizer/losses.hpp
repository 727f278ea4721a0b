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
#include <vector>

#include "sidrec/numerics/rng.hpp"
#include "sidrec/numerics/tape.hpp"
#include "sidrec/quantizer/rqvae.hpp"

namespace sidrec {

// Which representation enters the co-occurrence loss.
enum class ContrastiveInput { kQuantized, kLatent };

// sum_m ||x_m - xhat_m||^2
double recon_loss(const ItemEmbeddingSet& item, const std::vector<std::vector<double>>& reconstructions);

// sum_l beta ||r_{l-1} - sg[e_l]||^2 + ||sg[r_{l-1}] - e_l||^2 over all L
// levels, where r_{l-1} is the residual entering level l.
double rq_loss(const QuantizationResult& result, const SidSpec& spec);

// In-batch co-occurrence loss. Rows 2i and 2i+1 of `reps` form a positive
// pair; every other row is a negative. Mean over all 2*N_b anchors of
// -log(exp(s_ii+/tau) / sum_{j != i} exp(s_ij/tau)) with s the dot product.
template <typename Real>
Var<Real> contrastive_loss(Var<Real> reps, Real temperature);
double contrastive_loss(const Tensor<double>& reps, double temperature);

// A training batch of 2*N_b items laid out pairwise, one tensor per modality.
template <typename Real>
struct QuantizerBatch {
  std::vector<Tensor<Real>> inputs;
  std::size_t rows() const { return inputs.empty() ? 0 : inputs[0].rows(); }
};

// Every stop-gradient quantity of the loss evaluated at the current
// parameters. Rebuilding the graph from a fixed snapshot gives a smooth
// function of the parameters whose true gradient is the straight-through one,
// which is what the finite-difference checks rely on.
template <typename Real>
struct QuantizerSnapshot {
  int rank = 1;
  std::vector<int> mask;
  std::vector<std::vector<std::size_t>> codes;  // [level][row]
  std::vector<Tensor<Real>> prefix;             // sum_{k<l} e_k, [rows x latent]
  std::vector<Tensor<Real>> residual_in;        // r_{l-1}
  std::vector<Tensor<Real>> code_values;        // e_l
  Tensor<Real> straight_through_offset;         // zhat - z
  Tensor<Real> quantized;                       // zhat
  Tensor<Real> latent;                          // z
};

template <typename Real>
QuantizerSnapshot<Real> capture_snapshot(const RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch,
                                         int rank);

template <typename Real>
struct LossGraph {
  Var<Real> total, recon, rq, con;
};

// L_recon + L_rq + w * L_con, with recon and rq averaged over the batch rows.
template <typename Real>
LossGraph<Real> build_total_loss(Tape<Real>& tape, RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch,
                                 const QuantizerSnapshot<Real>& snapshot,
                                 ContrastiveInput input = ContrastiveInput::kQuantized);

struct LossBreakdown {
  double total = 0, recon = 0, rq = 0, con = 0;
  int rank = 0;
};

// Samples one mask rank for the batch and evaluates the loss.
template <typename Real>
LossBreakdown total_loss(RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch, Rng& rng,
                         ContrastiveInput input = ContrastiveInput::kQuantized);

}  // namespace sidrec
