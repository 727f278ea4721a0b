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

#include "sidrec/quantizer/rqvae.hpp"

#include <cmath>

#include "sidrec/common/error.hpp"
#include "sidrec/numerics/kernels.hpp"
#include "sidrec/numerics/ops.hpp"

namespace sidrec {
namespace {

template <typename Real>
Parameter<Real> gaussian(const std::string& name, Shape shape, double stddev, Rng& rng) {
  Tensor<Real> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<Real>(stddev * rng.normal());
  return Parameter<Real>(name, std::move(t));
}

template <typename Real>
Mlp<Real> make_mlp(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  Mlp<Real> m;
  m.w1 = gaussian<Real>(prefix + ".w1", {in, hidden}, std::sqrt(2.0 / static_cast<double>(in)), rng);
  m.b1 = Parameter<Real>(prefix + ".b1", Tensor<Real>(Shape{hidden}));
  m.w2 = gaussian<Real>(prefix + ".w2", {hidden, out}, std::sqrt(1.0 / static_cast<double>(hidden)), rng);
  m.b2 = Parameter<Real>(prefix + ".b2", Tensor<Real>(Shape{out}));
  return m;
}

template <typename MlpT, typename Bind>
auto mlp_graph(MlpT& m, Bind&& bind, decltype(bind(m.w1)) x) {
  auto h = ops::relu(ops::add_bias(ops::matmul(x, bind(m.w1)), bind(m.b1)));
  return ops::add_bias(ops::matmul(h, bind(m.w2)), bind(m.b2));
}

template <typename ModelT, typename Bind>
auto encode_graph(ModelT& model, Bind&& bind, std::span<const decltype(bind(model.fusion_w))> inputs) {
  using VarT = decltype(bind(model.fusion_w));
  if (inputs.size() != model.encoders.size()) {
    fail(ErrorKind::kData, "expected " + std::to_string(model.encoders.size()) + " modalities, got " +
                               std::to_string(inputs.size()));
  }
  std::vector<VarT> parts;
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    if (inputs[m].value().cols() != model.dims.modality_dims[m] || inputs[m].value().rank() != 2) {
      fail(ErrorKind::kDimension, "modality " + std::to_string(m) + ": expected width " +
                                      std::to_string(model.dims.modality_dims[m]) + ", got " +
                                      shape_string(inputs[m].shape()));
    }
    parts.push_back(mlp_graph(model.encoders[m], bind, inputs[m]));
  }
  auto fused = parts.size() == 1 ? parts[0] : ops::concat_cols(std::span<const VarT>(parts));
  return ops::add_bias(ops::matmul(fused, bind(model.fusion_w)), bind(model.fusion_b));
}

template <typename Real>
std::vector<QuantizationResult> quantize_rows(const Real* z, std::size_t rows, const RqVaeModel<Real>& model,
                                              int rank) {
  const auto& spec = model.spec;
  if (rank < 1 || rank > spec.levels) {
    fail(ErrorKind::kIndex, "mask rank " + std::to_string(rank) + " outside [1, " + std::to_string(spec.levels) + "]");
  }
  const std::size_t d = model.dims.latent;
  const auto mask = level_mask(spec, rank);
  std::vector<double> resid(z, z + rows * d);
  for (double v : resid) {
    if (!std::isfinite(v)) fail(ErrorKind::kNumeric, "quantize: non-finite latent");
  }

  std::vector<QuantizationResult> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    out[i].rank = rank;
    out[i].residuals.emplace_back(resid.begin() + i * d, resid.begin() + (i + 1) * d);
    out[i].quantized.assign(d, 0.0);
  }
  std::vector<std::uint32_t> idx(rows);
  for (std::size_t l = 0; l < model.codebooks.size(); ++l) {
    const auto& book = model.codebooks[l].value;
    const std::vector<double> book_d(book.data.begin(), book.data.end());
    kernels::nearest_rows(resid.data(), rows, book_d.data(), book.rows(), d, idx.data());
    for (std::size_t i = 0; i < rows; ++i) {
      const double* e = book_d.data() + idx[i] * d;
      double* r = resid.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) r[j] -= e[j];
      auto& res = out[i];
      res.codewords.codes.push_back(idx[i]);
      res.code_vectors.emplace_back(e, e + d);
      res.residuals.emplace_back(r, r + d);
      if (mask[l]) {
        for (std::size_t j = 0; j < d; ++j) res.quantized[j] += e[j];
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> QuantizationResult::full_quantized() const {
  std::vector<double> sum(residuals.empty() ? 0 : residuals[0].size(), 0.0);
  for (const auto& e : code_vectors) {
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += e[j];
  }
  return sum;
}

template <typename Real>
RqVaeModel<Real>::RqVaeModel(QuantizerDims d, SidSpec s, std::uint64_t seed)
    : dims(std::move(d)), spec(s) {
  spec.validate();
  if (dims.modality_dims.empty()) fail(ErrorKind::kConfig, "quantizer needs at least one modality");
  Rng rng(seed);
  const std::size_t m_count = dims.modality_dims.size();
  for (std::size_t m = 0; m < m_count; ++m) {
    encoders.push_back(make_mlp<Real>("encoder." + std::to_string(m), dims.modality_dims[m], dims.hidden,
                                      dims.modality_latent, rng));
  }
  const std::size_t fused = dims.modality_latent * m_count;
  fusion_w = gaussian<Real>("fusion.w", {fused, dims.latent}, std::sqrt(1.0 / static_cast<double>(fused)), rng);
  fusion_b = Parameter<Real>("fusion.b", Tensor<Real>(Shape{dims.latent}));
  for (std::size_t m = 0; m < m_count; ++m) {
    decoders.push_back(make_mlp<Real>("decoder." + std::to_string(m), dims.latent, dims.hidden,
                                      dims.modality_dims[m], rng));
  }
  for (int l = 1; l <= spec.levels; ++l) {
    codebooks.push_back(gaussian<Real>("codebook." + std::to_string(l - 1),
                                       {static_cast<std::size_t>(codebook_cardinality(l, spec)), dims.latent}, 0.1,
                                       rng));
  }
}

template <typename Real>
std::vector<Parameter<Real>*> RqVaeModel<Real>::parameters() {
  std::vector<Parameter<Real>*> out;
  for (auto& m : encoders) out.insert(out.end(), {&m.w1, &m.b1, &m.w2, &m.b2});
  out.push_back(&fusion_w);
  out.push_back(&fusion_b);
  for (auto& m : decoders) out.insert(out.end(), {&m.w1, &m.b1, &m.w2, &m.b2});
  for (auto& c : codebooks) out.push_back(&c);
  return out;
}

template <typename Real>
std::vector<const Parameter<Real>*> RqVaeModel<Real>::parameters() const {
  auto mut = const_cast<RqVaeModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

template <typename Real>
void RqVaeModel<Real>::validate() const {
  if (encoders.size() != decoders.size() || encoders.size() != dims.modality_dims.size()) {
    fail(ErrorKind::kData, "quantizer: encoder/decoder/modality counts disagree");
  }
  std::size_t fused = 0;
  for (const auto& e : encoders) fused += e.w2.value.shape.back();
  if (fusion_w.value.rank() != 2 || fusion_w.value.shape[0] != fused || fusion_w.value.shape[1] != dims.latent) {
    fail(ErrorKind::kDimension, "quantizer: fusion projection " + shape_string(fusion_w.value.shape) +
                                    " does not match encoder outputs of total width " + std::to_string(fused));
  }
  if (codebooks.size() != static_cast<std::size_t>(spec.levels)) {
    fail(ErrorKind::kData, "quantizer: codebook count differs from levels");
  }
  for (int l = 1; l <= spec.levels; ++l) {
    const auto& book = codebooks[static_cast<std::size_t>(l - 1)].value;
    if (book.rows() != static_cast<std::size_t>(codebook_cardinality(l, spec)) || book.cols() != dims.latent) {
      fail(ErrorKind::kDimension, "quantizer: codebook " + std::to_string(l) + " has shape " +
                                      shape_string(book.shape));
    }
    if (!book.all_finite()) fail(ErrorKind::kNumeric, "quantizer: non-finite codebook " + std::to_string(l));
  }
}

template <typename Real>
template <typename To>
RqVaeModel<To> RqVaeModel<Real>::cast() const {
  RqVaeModel<To> out;
  out.dims = dims;
  out.spec = spec;
  auto conv = [](const Parameter<Real>& p) { return Parameter<To>(p.name, tensor_cast<To>(p.value)); };
  auto conv_mlp = [&](const Mlp<Real>& m) { return Mlp<To>{conv(m.w1), conv(m.b1), conv(m.w2), conv(m.b2)}; };
  for (const auto& m : encoders) out.encoders.push_back(conv_mlp(m));
  for (const auto& m : decoders) out.decoders.push_back(conv_mlp(m));
  out.fusion_w = conv(fusion_w);
  out.fusion_b = conv(fusion_b);
  for (const auto& c : codebooks) out.codebooks.push_back(conv(c));
  return out;
}

template <typename Real>
Var<Real> encode_fuse(Tape<Real>& tape, RqVaeModel<Real>& model, std::span<const Var<Real>> modality_batches) {
  auto bind = [&tape](Parameter<Real>& p) { return tape.parameter(p); };
  return encode_graph(model, bind, modality_batches);
}

template <typename Real>
Var<Real> decode(Tape<Real>& tape, Mlp<Real>& decoder, Var<Real> latent) {
  auto bind = [&tape](Parameter<Real>& p) { return tape.parameter(p); };
  return mlp_graph(decoder, bind, latent);
}

template <typename Real>
Tensor<Real> encode_batch(const RqVaeModel<Real>& model, const std::vector<Tensor<Real>>& modality_batches) {
  Tape<Real> tape;
  auto bind = [&tape](const Parameter<Real>& p) { return tape.constant(p.value); };
  std::vector<Var<Real>> inputs;
  for (const auto& t : modality_batches) inputs.push_back(tape.constant(t));
  return encode_graph(model, bind, std::span<const Var<Real>>(inputs)).value();
}

template <typename Real>
std::vector<Real> encode_fuse(const RqVaeModel<Real>& model, const ItemEmbeddingSet& item) {
  if (item.embeddings.size() != model.modalities()) {
    fail(ErrorKind::kData, "item has " + std::to_string(item.embeddings.size()) + " modalities, model expects " +
                               std::to_string(model.modalities()));
  }
  std::vector<Tensor<Real>> inputs;
  for (std::size_t m = 0; m < item.embeddings.size(); ++m) {
    const auto& e = item.embeddings[m];
    if (e.size() != model.dims.modality_dims[m]) {
      fail(ErrorKind::kDimension, "modality " + std::to_string(m) + ": expected width " +
                                      std::to_string(model.dims.modality_dims[m]) + ", got " +
                                      std::to_string(e.size()));
    }
    inputs.emplace_back(Shape{1, e.size()}, std::vector<Real>(e.begin(), e.end()));
  }
  return encode_batch(model, inputs).data;
}

template <typename Real>
QuantizationResult quantize(std::span<const Real> z, const RqVaeModel<Real>& model, int rank) {
  if (z.size() != model.dims.latent) {
    fail(ErrorKind::kDimension, "quantize: latent width " + std::to_string(z.size()) + ", model expects " +
                                    std::to_string(model.dims.latent));
  }
  return std::move(quantize_rows(z.data(), 1, model, rank)[0]);
}

template <typename Real>
std::vector<QuantizationResult> quantize_batch(const Tensor<Real>& z, const RqVaeModel<Real>& model, int rank) {
  if (z.rank() != 2 || z.cols() != model.dims.latent) {
    fail(ErrorKind::kDimension, "quantize_batch: expected [rows x " + std::to_string(model.dims.latent) +
                                    "], got " + shape_string(z.shape));
  }
  return quantize_rows(z.data.data(), z.rows(), model, rank);
}

template struct RqVaeModel<float>;
template struct RqVaeModel<double>;
template RqVaeModel<double> RqVaeModel<float>::cast<double>() const;
template RqVaeModel<float> RqVaeModel<double>::cast<float>() const;
template RqVaeModel<float> RqVaeModel<float>::cast<float>() const;

#define SIDREC_INSTANTIATE_RQVAE(Real)                                                                    \
  template Var<Real> encode_fuse<Real>(Tape<Real>&, RqVaeModel<Real>&, std::span<const Var<Real>>);     \
  template Var<Real> decode<Real>(Tape<Real>&, Mlp<Real>&, Var<Real>);                                  \
  template Tensor<Real> encode_batch<Real>(const RqVaeModel<Real>&, const std::vector<Tensor<Real>>&);  \
  template std::vector<Real> encode_fuse<Real>(const RqVaeModel<Real>&, const ItemEmbeddingSet&);       \
  template QuantizationResult quantize<Real>(std::span<const Real>, const RqVaeModel<Real>&, int);      \
  template std::vector<QuantizationResult> quantize_batch<Real>(const Tensor<Real>&, const RqVaeModel<Real>&, int);

SIDREC_INSTANTIATE_RQVAE(float)
SIDREC_INSTANTIATE_RQVAE(double)

}  // namespace sidrec
