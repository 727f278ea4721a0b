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

#include "sidrec/quantizer/losses.hpp"

#include <algorithm>
#include <cmath>

#include "sidrec/common/error.hpp"
#include "sidrec/numerics/ops.hpp"

namespace sidrec {
namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

void check_pairs(std::size_t rows) {
  if (rows % 2 != 0) fail(ErrorKind::kData, "co-occurrence batch has an odd row count " + std::to_string(rows));
  if (rows < 4) fail(ErrorKind::kData, "co-occurrence batch needs at least 2 pairs, got " + std::to_string(rows / 2));
}

}  // namespace

double recon_loss(const ItemEmbeddingSet& item, const std::vector<std::vector<double>>& reconstructions) {
  if (item.embeddings.size() != reconstructions.size()) {
    fail(ErrorKind::kDimension, "recon_loss: " + std::to_string(item.embeddings.size()) + " modalities vs " +
                                    std::to_string(reconstructions.size()) + " reconstructions");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < reconstructions.size(); ++m) {
    const auto& x = item.embeddings[m];
    const auto& xhat = reconstructions[m];
    if (x.size() != xhat.size()) {
      fail(ErrorKind::kDimension, "recon_loss: modality " + std::to_string(m) + " width " +
                                      std::to_string(x.size()) + " vs " + std::to_string(xhat.size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = static_cast<double>(x[j]) - xhat[j];
      total += diff * diff;
    }
  }
  return total;
}

double rq_loss(const QuantizationResult& result, const SidSpec& spec) {
  if (result.code_vectors.size() + 1 != result.residuals.size()) {
    fail(ErrorKind::kDimension, "rq_loss: residual chain does not match code count");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < result.code_vectors.size(); ++l) {
    const double dist = squared_distance(result.residuals[l], result.code_vectors[l]);
    total += spec.beta * dist + dist;
  }
  return total;
}

template <typename Real>
Var<Real> contrastive_loss(Var<Real> reps, Real temperature) {
  const std::size_t rows = reps.value().rows();
  check_pairs(rows);
  std::vector<std::size_t> targets(rows), excluded(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    targets[i] = i ^ 1U;
    excluded[i] = i;
  }
  auto logits = ops::scale(ops::matmul_nt(reps, reps), Real(1) / temperature);
  return ops::softmax_cross_entropy(logits, std::span<const std::size_t>(targets),
                                    std::span<const std::size_t>(excluded));
}

double contrastive_loss(const Tensor<double>& reps, double temperature) {
  const std::size_t rows = reps.rows();
  check_pairs(rows);
  const std::size_t d = reps.cols();
  double total = 0.0;
  std::vector<double> s(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double peak = -INFINITY;
    for (std::size_t j = 0; j < rows; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += reps(i, k) * reps(j, k);
      s[j] = dot / temperature;
      if (j != i) peak = std::max(peak, s[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
      if (j != i) denom += std::exp(s[j] - peak);
    }
    total += peak + std::log(denom) - s[i ^ 1U];
  }
  return total / static_cast<double>(rows);
}

template <typename Real>
QuantizerSnapshot<Real> capture_snapshot(const RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch,
                                         int rank) {
  QuantizerSnapshot<Real> snap;
  snap.rank = rank;
  snap.mask = level_mask(model.spec, rank);
  snap.latent = encode_batch(model, batch.inputs);
  const auto results = quantize_batch(snap.latent, model, rank);
  const std::size_t rows = snap.latent.rows();
  const std::size_t d = snap.latent.cols();
  const std::size_t levels = model.codebooks.size();
  snap.codes.assign(levels, std::vector<std::size_t>(rows));
  snap.prefix.assign(levels, Tensor<Real>(Shape{rows, d}));
  snap.residual_in.assign(levels, Tensor<Real>(Shape{rows, d}));
  snap.code_values.assign(levels, Tensor<Real>(Shape{rows, d}));
  snap.quantized = Tensor<Real>(Shape{rows, d});
  snap.straight_through_offset = Tensor<Real>(Shape{rows, d});
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& res = results[i];
    std::vector<double> prefix(d, 0.0);
    for (std::size_t l = 0; l < levels; ++l) {
      snap.codes[l][i] = res.codewords.codes[l];
      for (std::size_t j = 0; j < d; ++j) {
        snap.prefix[l](i, j) = static_cast<Real>(prefix[j]);
        snap.residual_in[l](i, j) = static_cast<Real>(res.residuals[l][j]);
        snap.code_values[l](i, j) = static_cast<Real>(res.code_vectors[l][j]);
        prefix[j] += res.code_vectors[l][j];
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      snap.quantized(i, j) = static_cast<Real>(res.quantized[j]);
      snap.straight_through_offset(i, j) = static_cast<Real>(res.quantized[j] - static_cast<double>(snap.latent(i, j)));
    }
  }
  return snap;
}

template <typename Real>
LossGraph<Real> build_total_loss(Tape<Real>& tape, RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch,
                                 const QuantizerSnapshot<Real>& snapshot, ContrastiveInput input) {
  const std::size_t rows = batch.rows();
  const Real inv_rows = Real(1) / static_cast<Real>(rows);
  std::vector<Var<Real>> inputs;
  for (const auto& t : batch.inputs) inputs.push_back(tape.constant(t));
  const auto z = encode_fuse(tape, model, std::span<const Var<Real>>(inputs));

  // Straight-through: forward value zhat, gradient identity onto z while any level is active.
  const bool any_active = std::find(snapshot.mask.begin(), snapshot.mask.end(), 1) != snapshot.mask.end();
  const auto zhat = any_active ? ops::add(z, tape.constant(snapshot.straight_through_offset))
                               : tape.constant(snapshot.quantized);

  std::vector<Var<Real>> recon_terms;
  for (std::size_t m = 0; m < model.decoders.size(); ++m) {
    auto xhat = decode(tape, model.decoders[m], zhat);
    recon_terms.push_back(ops::sum_squares(ops::sub(xhat, inputs[m])));
  }
  const std::vector<Real> ones(recon_terms.size(), Real(1));
  auto recon = ops::scale(
      ops::weighted_sum(std::span<const Var<Real>>(recon_terms), std::span<const Real>(ones)), inv_rows);

  std::vector<Var<Real>> rq_terms;
  std::vector<Real> rq_weights;
  for (std::size_t l = 0; l < model.codebooks.size(); ++l) {
    auto residual = ops::sub(z, tape.constant(snapshot.prefix[l]));
    auto commit = ops::sum_squares(ops::sub(residual, tape.constant(snapshot.code_values[l])));
    auto book = tape.parameter(model.codebooks[l]);
    auto chosen = ops::gather_rows(book, std::span<const std::size_t>(snapshot.codes[l]));
    auto update = ops::sum_squares(ops::sub(tape.constant(snapshot.residual_in[l]), chosen));
    rq_terms.push_back(commit);
    rq_weights.push_back(static_cast<Real>(model.spec.beta));
    rq_terms.push_back(update);
    rq_weights.push_back(Real(1));
  }
  auto rq = ops::scale(
      ops::weighted_sum(std::span<const Var<Real>>(rq_terms), std::span<const Real>(rq_weights)), inv_rows);

  auto reps = input == ContrastiveInput::kQuantized ? zhat : z;
  auto con = contrastive_loss(reps, static_cast<Real>(model.spec.contrastive_temperature));

  const std::vector<Var<Real>> parts{recon, rq, con};
  const std::vector<Real> weights{Real(1), Real(1), static_cast<Real>(model.spec.contrastive_weight)};
  auto total = ops::weighted_sum(std::span<const Var<Real>>(parts), std::span<const Real>(weights));
  return {total, recon, rq, con};
}

template <typename Real>
LossBreakdown total_loss(RqVaeModel<Real>& model, const QuantizerBatch<Real>& batch, Rng& rng,
                         ContrastiveInput input) {
  const int rank = sample_mask_rank(model.spec, rng);
  const auto snapshot = capture_snapshot(model, batch, rank);
  Tape<Real> tape;
  const auto graph = build_total_loss(tape, model, batch, snapshot, input);
  return {static_cast<double>(graph.total.value().item()), static_cast<double>(graph.recon.value().item()),
          static_cast<double>(graph.rq.value().item()), static_cast<double>(graph.con.value().item()), rank};
}

#define SIDREC_INSTANTIATE_LOSSES(Real)                                                                          \
  template Var<Real> contrastive_loss<Real>(Var<Real>, Real);                                                  \
  template QuantizerSnapshot<Real> capture_snapshot<Real>(const RqVaeModel<Real>&, const QuantizerBatch<Real>&, \
                                                          int);                                                \
  template LossGraph<Real> build_total_loss<Real>(Tape<Real>&, RqVaeModel<Real>&, const QuantizerBatch<Real>&, \
                                                  const QuantizerSnapshot<Real>&, ContrastiveInput);           \
  template LossBreakdown total_loss<Real>(RqVaeModel<Real>&, const QuantizerBatch<Real>&, Rng&, ContrastiveInput);

SIDREC_INSTANTIATE_LOSSES(float)
SIDREC_INSTANTIATE_LOSSES(double)

}  // namespace sidrec
