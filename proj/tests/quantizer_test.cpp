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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "sidrec/numerics/gradcheck.hpp"
#include "sidrec/numerics/ops.hpp"
#include "sidrec/quantizer/checkpoint.hpp"
#include "sidrec/quantizer/losses.hpp"
#include "sidrec/quantizer/train.hpp"
#include "test_util.hpp"

namespace sidrec {
namespace {

using testing::expect_error;
using testing::random_tensor;

SidSpec make_spec(int levels, int base) {
  SidSpec spec;
  spec.levels = levels;
  spec.base_cardinality = base;
  return spec;
}

QuantizerDims make_dims(std::vector<std::size_t> modality_dims, std::size_t hidden, std::size_t modality_latent,
                        std::size_t latent) {
  QuantizerDims d;
  d.modality_dims = std::move(modality_dims);
  d.hidden = hidden;
  d.modality_latent = modality_latent;
  d.latent = latent;
  return d;
}

template <typename Real>
void set_identity(Parameter<Real>& p) {
  p.value.fill(Real(0));
  for (std::size_t i = 0; i < std::min(p.value.rows(), p.value.cols()); ++i) p.value(i, i) = Real(1);
}

// M=1 network whose encoder, fusion and decoder are all identity maps of width n.
template <typename Real>
RqVaeModel<Real> identity_model(std::size_t n, SidSpec spec) {
  RqVaeModel<Real> model(make_dims({n}, n, n, n), spec, 3);
  for (auto* mlp : {&model.encoders[0], &model.decoders[0]}) {
    set_identity(mlp->w1);
    set_identity(mlp->w2);
    mlp->b1.value.fill(Real(0));
    mlp->b2.value.fill(Real(0));
  }
  set_identity(model.fusion_w);
  model.fusion_b.value.fill(Real(0));
  return model;
}

// Item i's embeddings are tagged with i in their first coordinate.
EmbeddingCorpus tagged_corpus(std::size_t items, std::vector<std::size_t> dims, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingCorpus corpus;
  corpus.dims = dims;
  for (std::size_t i = 0; i < items; ++i) corpus.item_ids.push_back(1000 + i);
  for (std::size_t dim : dims) {
    auto t = random_tensor<float>({items, dim}, rng);
    for (std::size_t i = 0; i < items; ++i) t(i, 0) = static_cast<float>(i);
    corpus.modalities.push_back(std::move(t));
  }
  return corpus;
}

std::vector<ItemPair> neighbour_pairs(std::size_t items) {
  std::vector<ItemPair> pairs;
  for (std::size_t i = 0; i + 1 < items; ++i) pairs.push_back({i, i + 1});
  for (std::size_t i = 0; i + 7 < items; i += 3) pairs.push_back({i, i + 7});
  return pairs;
}

// ---- cardinalities and masks ----------------------------------------------

TEST(Cardinality, HalvesPerLevelFromWideBase) {
  const auto spec = make_spec(3, 2048);
  EXPECT_EQ(codebook_cardinality(1, spec), 2048);
  EXPECT_EQ(codebook_cardinality(2, spec), 1024);
  EXPECT_EQ(codebook_cardinality(3, spec), 512);
}

TEST(Cardinality, DeskScaleDefaults) {
  const SidSpec spec;
  EXPECT_EQ(codebook_cardinality(1, spec), 64);
  EXPECT_EQ(codebook_cardinality(4, spec), 8);
  EXPECT_EQ(cardinalities(spec), (std::vector<int>{64, 32, 16, 8}));
}

TEST(Cardinality, UniformScheduleMatchesSidSpace) {
  auto spec = make_spec(4, 64);
  spec.schedule = CardinalitySchedule::kUniform;
  // 64*32*16*8 = 2^18, fourth root 2^4.5 = 22.6.
  EXPECT_EQ(cardinalities(spec), (std::vector<int>{23, 23, 23, 23}));
  spec = make_spec(3, 2048);
  spec.schedule = CardinalitySchedule::kUniform;
  EXPECT_EQ(cardinalities(spec), (std::vector<int>{1024, 1024, 1024}));
  spec = make_spec(1, 7);
  spec.schedule = CardinalitySchedule::kUniform;
  EXPECT_EQ(cardinalities(spec), (std::vector<int>{7}));
}

TEST(Cardinality, UniformSizeIsNearestIntegerGeometricMean) {
  for (int levels = 1; levels <= 6; ++levels) {
    for (int base : {32, 64, 96, 256, 2048}) {
      auto multi = make_spec(levels, base);
      auto uniform = multi;
      uniform.schedule = CardinalitySchedule::kUniform;
      double log_space = 0.0;
      for (int c : cardinalities(multi)) log_space += std::log(static_cast<double>(c));
      const double mean = std::exp(log_space / levels);
      const int got = codebook_cardinality(levels, uniform);
      EXPECT_LE(std::abs(got - mean), 0.5 + 1e-9) << levels << " " << base;
    }
  }
}

TEST(Cardinality, RejectsIndivisibleBaseAndBadLevel) {
  expect_error(ErrorKind::kConfig, [] { make_spec(4, 100).validate(); }, "100");
  expect_error(ErrorKind::kConfig, [] { make_spec(0, 64).validate(); });
  expect_error(ErrorKind::kIndex, [] { codebook_cardinality(5, make_spec(4, 64)); });
  expect_error(ErrorKind::kIndex, [] { codebook_cardinality(0, make_spec(4, 64)); });
}

TEST(Mask, SingleLevelInclusive) {
  const auto spec = make_spec(1, 8);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_mask_rank(spec, rng), 1);
  EXPECT_EQ(level_mask(spec, 1), (std::vector<int>{1}));
}

TEST(Mask, FullRankSelectsEveryLevel) {
  EXPECT_EQ(level_mask(make_spec(4, 64), 4), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(level_mask(make_spec(4, 64), 2), (std::vector<int>{1, 1, 0, 0}));
}

TEST(Mask, PaperLiteralRankOneIsEmpty) {
  auto spec = make_spec(4, 64);
  spec.mask_mode = MaskMode::kPaperLiteral;
  EXPECT_EQ(level_mask(spec, 1), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(level_mask(spec, 4), (std::vector<int>{1, 1, 1, 0}));
}

TEST(Mask, RankIsUniformOverLevels) {
  const auto spec = make_spec(4, 64);
  Rng rng(5);
  std::vector<int> counts(5);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const int r = sample_mask_rank(spec, rng);
    ASSERT_GE(r, 1);
    ASSERT_LE(r, 4);
    ++counts[static_cast<std::size_t>(r)];
  }
  // Binomial sd is about 87 draws; 5 sd band.
  for (int r = 1; r <= 4; ++r) EXPECT_NEAR(counts[static_cast<std::size_t>(r)], draws / 4, 440);
}

TEST(Mask, ParsesModesAndSchedules) {
  EXPECT_EQ(parse_mask_mode("paper_literal"), MaskMode::kPaperLiteral);
  EXPECT_EQ(parse_schedule(to_string(CardinalitySchedule::kUniform)), CardinalitySchedule::kUniform);
  expect_error(ErrorKind::kConfig, [] { parse_mask_mode("sometimes"); }, "sometimes");
}

// ---- encoding --------------------------------------------------------------

TEST(EncodeFuse, IdentityNetworkReturnsInput) {
  const auto model = identity_model<float>(4, make_spec(1, 8));
  ItemEmbeddingSet item{{{0.5f, 1.5f, 2.0f, 0.25f}}};
  EXPECT_EQ(encode_fuse(model, item), item.embeddings[0]);
}

TEST(EncodeFuse, IdenticalItemsGiveIdenticalLatents) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 7);
  Rng rng(8);
  ItemEmbeddingSet a{{random_tensor<float>({24}, rng).data, random_tensor<float>({40}, rng).data}};
  ItemEmbeddingSet b = a;
  EXPECT_EQ(encode_fuse(model, a), encode_fuse(model, b));
}

TEST(EncodeFuse, ZeroedSecondEncoderIsDeadPath) {
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 9);
  model.encoders[1].w2.value.fill(0.0f);
  model.encoders[1].b2.value.fill(0.0f);
  Rng rng(10);
  ItemEmbeddingSet item{{random_tensor<float>({24}, rng).data, random_tensor<float>({40}, rng).data}};
  const auto before = encode_fuse(model, item);
  for (auto& v : item.embeddings[1]) v += static_cast<float>(rng.normal());
  EXPECT_EQ(encode_fuse(model, item), before);
}

TEST(EncodeFuse, WrongModalityCountOrWidthNamesModality) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 11);
  expect_error(ErrorKind::kData, [&] { encode_fuse(model, ItemEmbeddingSet{{std::vector<float>(24)}}); },
               "modalities");
  expect_error(ErrorKind::kDimension,
               [&] { encode_fuse(model, ItemEmbeddingSet{{std::vector<float>(24), std::vector<float>(39)}}); },
               "modality 1");
}

TEST(EncodeFuse, BatchMatchesSingleItem) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 12);
  Rng rng(13);
  std::vector<Tensor<float>> batch{random_tensor<float>({5, 24}, rng), random_tensor<float>({5, 40}, rng)};
  const auto z = encode_batch(model, batch);
  for (std::size_t i = 0; i < 5; ++i) {
    ItemEmbeddingSet item;
    for (const auto& t : batch) item.embeddings.emplace_back(t.row(i).begin(), t.row(i).end());
    const auto single = encode_fuse(model, item);
    for (std::size_t j = 0; j < single.size(); ++j) EXPECT_FLOAT_EQ(single[j], z(i, j));
  }
}

TEST(RqVaeModel, ShapesFollowSpec) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 14);
  ASSERT_EQ(model.codebooks.size(), 4u);
  EXPECT_EQ(model.codebooks[0].value.shape, (Shape{64, 32}));
  EXPECT_EQ(model.codebooks[3].value.shape, (Shape{8, 32}));
  EXPECT_EQ(model.fusion_w.value.shape, (Shape{32, 32}));
  EXPECT_EQ(model.encoders.size(), model.decoders.size());
  model.validate();
}

TEST(RqVaeModel, ValidateCatchesBadCodebook) {
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 15);
  model.codebooks[2].value = Tensor<float>(Shape{15, 32});
  expect_error(ErrorKind::kDimension, [&] { model.validate(); }, "codebook 3");
  model.codebooks[2].value = Tensor<float>(Shape{16, 32});
  model.codebooks[2].value.data[5] = NAN;
  expect_error(ErrorKind::kNumeric, [&] { model.validate(); });
}

// ---- quantization ----------------------------------------------------------

TEST(Quantize, ExactCodebookMatch) {
  RqVaeModel<float> model(make_dims({4}, 4, 4, 4), make_spec(1, 8), 16);
  const auto row = model.codebooks[0].value.row(5);
  const std::vector<float> z(row.begin(), row.end());
  const auto res = quantize(std::span<const float>(z), model, 1);
  EXPECT_EQ(res.codewords.codes, (std::vector<std::uint32_t>{5}));
  for (double v : res.residuals[1]) EXPECT_EQ(v, 0.0);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(res.quantized[j], z[j]);
}

TEST(Quantize, TiesPickLowestIndex) {
  RqVaeModel<float> model(make_dims({2}, 2, 2, 2), make_spec(1, 8), 17);
  auto& book = model.codebooks[0].value;
  for (std::size_t c = 0; c < 8; ++c) {
    book(c, 0) = 10.0f + static_cast<float>(c);
    book(c, 1) = 10.0f;
  }
  book(2, 0) = 1.0f;
  book(2, 1) = 0.0f;
  book(6, 0) = -1.0f;
  book(6, 1) = 0.0f;
  const std::vector<float> z{0.0f, 0.0f};
  EXPECT_EQ(quantize(std::span<const float>(z), model, 1).codewords.codes[0], 2u);
}

TEST(Quantize, MatchesBruteForceScan) {
  RqVaeModel<double> model(make_dims({4}, 4, 4, 4), make_spec(3, 8), 18);
  ASSERT_EQ(model.codebooks[2].value.rows(), 2u);
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto z = random_tensor<double>({4}, rng);
    const auto res = quantize(std::span<const double>(z.data), model, 3);
    std::vector<double> r = z.data;
    for (std::size_t l = 0; l < 3; ++l) {
      const auto& book = model.codebooks[l].value;
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t c = 0; c < book.rows(); ++c) {
        double dist = 0;
        for (std::size_t j = 0; j < 4; ++j) dist += (r[j] - book(c, j)) * (r[j] - book(c, j));
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      ASSERT_EQ(res.codewords.codes[l], best) << "trial " << trial << " level " << l;
      for (std::size_t j = 0; j < 4; ++j) r[j] -= book(best, j);
    }
  }
}

TEST(Quantize, ResidualChainTelescopesExactly) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 20);
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto z = random_tensor<float>({32}, rng, 0.3);
    const auto res = quantize(std::span<const float>(z.data), model, 1 + trial % 4);
    ASSERT_EQ(res.residuals.size(), 5u);
    for (std::size_t j = 0; j < 32; ++j) ASSERT_EQ(res.residuals[0][j], static_cast<double>(z.data[j]));
    for (std::size_t l = 1; l <= 4; ++l) {
      for (std::size_t j = 0; j < 32; ++j) {
        ASSERT_EQ(res.residuals[l][j], res.residuals[l - 1][j] - res.code_vectors[l - 1][j]);
      }
    }
    const auto full = res.full_quantized();
    for (std::size_t j = 0; j < 32; ++j) ASSERT_EQ(full[j] + res.residuals[4][j], static_cast<double>(z.data[j]));
  }
}

TEST(Quantize, CodesIndependentOfMaskRankAndWithinCardinality) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 22);
  Rng rng(23);
  const auto cards = cardinalities(model.spec);
  for (int trial = 0; trial < 50; ++trial) {
    const auto z = random_tensor<float>({32}, rng, 0.3);
    const auto base = quantize(std::span<const float>(z.data), model, 1);
    for (int r = 2; r <= 4; ++r) {
      EXPECT_EQ(quantize(std::span<const float>(z.data), model, r).codewords, base.codewords);
    }
    for (std::size_t l = 0; l < 4; ++l) EXPECT_LT(base.codewords.codes[l], static_cast<std::uint32_t>(cards[l]));
  }
}

TEST(Quantize, MaskedSumUsesActiveLevelsOnly) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 24);
  Rng rng(25);
  const auto z = random_tensor<float>({32}, rng, 0.3);
  const auto res = quantize(std::span<const float>(z.data), model, 2);
  for (std::size_t j = 0; j < 32; ++j) {
    EXPECT_EQ(res.quantized[j], res.code_vectors[0][j] + res.code_vectors[1][j]);
  }
  auto literal = model;
  literal.spec.mask_mode = MaskMode::kPaperLiteral;
  for (double v : quantize(std::span<const float>(z.data), literal, 1).quantized) EXPECT_EQ(v, 0.0);
}

TEST(Quantize, RejectsBadRankAndWidth) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 26);
  const std::vector<float> z(32, 0.1f), short_z(31, 0.1f);
  expect_error(ErrorKind::kIndex, [&] { quantize(std::span<const float>(z), model, 5); });
  expect_error(ErrorKind::kDimension, [&] { quantize(std::span<const float>(short_z), model, 1); });
}

// ---- losses ----------------------------------------------------------------

TEST(ReconLoss, HandValues) {
  ItemEmbeddingSet one{{{1.0f, 0.0f}}};
  EXPECT_EQ(recon_loss(one, {{1.0, 0.0}}), 0.0);
  EXPECT_EQ(recon_loss(one, {{0.0, 0.0}}), 1.0);
  ItemEmbeddingSet two{{{0.5f}, {0.0f, 0.0f}}};
  // 0.5^2 = 0.25 and 0.75 split over two coordinates.
  EXPECT_DOUBLE_EQ(recon_loss(two, {{0.0}, {std::sqrt(0.5), std::sqrt(0.25)}}), 1.0);
  expect_error(ErrorKind::kDimension, [&] { recon_loss(one, {{0.0}}); });
}

QuantizationResult two_level_result() {
  QuantizationResult res;
  res.residuals = {{1.0, 2.0}, {0.5, 0.5}, {0.0, 1.0}};
  res.code_vectors = {{0.5, 1.5}, {0.5, -0.5}};
  res.rank = 2;
  return res;
}

TEST(RqLoss, ZeroWhenResidualsAreTheirCodes) {
  QuantizationResult res;
  res.residuals = {{1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}};
  res.code_vectors = {{1.0, 2.0}, {0.0, 0.0}};
  EXPECT_EQ(rq_loss(res, make_spec(2, 8)), 0.0);
}

TEST(RqLoss, BetaZeroLeavesCodebookTerm) {
  auto spec = make_spec(2, 8);
  spec.beta = 0.0;
  // ||(1,2)-(0.5,1.5)||^2 = 0.5 and ||(0.5,0.5)-(0.5,-0.5)||^2 = 1.
  EXPECT_DOUBLE_EQ(rq_loss(two_level_result(), spec), 1.5);
}

TEST(RqLoss, TwoLevelHandComputation) {
  auto spec = make_spec(2, 8);
  spec.beta = 0.25;
  const double level1 = 0.25 * 0.5 + 0.5;
  const double level2 = 0.25 * 1.0 + 1.0;
  EXPECT_DOUBLE_EQ(rq_loss(two_level_result(), spec), level1 + level2);
}

Tensor<double> rows_of(std::vector<std::vector<double>> rows) {
  Tensor<double> t(Shape{rows.size(), rows[0].size()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) t(i, j) = rows[i][j];
  }
  return t;
}

double tape_contrastive(const Tensor<double>& reps, double tau) {
  Tape<double> tape;
  return contrastive_loss(tape.constant(reps), tau).value().item();
}

TEST(ContrastiveLoss, SaturatedPairsGiveNearZero) {
  const double s = std::sqrt(40.0);
  const auto reps = rows_of({{s, 0}, {s, 0}, {-s, 0}, {-s, 0}});
  EXPECT_LT(contrastive_loss(reps, 1.0), 1e-6);
  EXPECT_LT(tape_contrastive(reps, 1.0), 1e-6);
  EXPECT_GE(contrastive_loss(reps, 1.0), 0.0);
}

TEST(ContrastiveLoss, UniformSimilaritiesGiveLogOfNegatives) {
  for (std::size_t nb : {2u, 3u, 5u, 16u}) {
    Tensor<double> reps(Shape{2 * nb, 3}, 0.0);
    for (std::size_t i = 0; i < 2 * nb; ++i) reps(i, 1) = 0.7;
    const double expected = std::log(2.0 * static_cast<double>(nb) - 1.0);
    EXPECT_NEAR(contrastive_loss(reps, 0.1), expected, 1e-12);
    EXPECT_NEAR(tape_contrastive(reps, 0.1), expected, 1e-12);
  }
}

TEST(ContrastiveLoss, FourVectorDirectSum) {
  const auto reps = rows_of({{1.0, 0.0}, {0.8, 0.6}, {0.0, -1.0}, {-0.5, 0.5}});
  auto dot = [&](std::size_t a, std::size_t b) { return reps(a, 0) * reps(b, 0) + reps(a, 1) * reps(b, 1); };
  const std::size_t partner[4] = {1, 0, 3, 2};
  double expected = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j != i) denom += std::exp(dot(i, j));
    }
    expected += -std::log(std::exp(dot(i, partner[i])) / denom);
  }
  expected /= 4.0;
  EXPECT_NEAR(contrastive_loss(reps, 1.0), expected, 1e-12);
  EXPECT_NEAR(tape_contrastive(reps, 1.0), expected, 1e-12);
}

TEST(ContrastiveLoss, NeedsTwoPairs) {
  const auto reps = rows_of({{1.0, 0.0}, {0.0, 1.0}});
  expect_error(ErrorKind::kData, [&] { contrastive_loss(reps, 1.0); }, "2 pairs");
}

TEST(ContrastiveLoss, NonNegativeOnRandomBatches) {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const auto reps = random_tensor<double>({8, 5}, rng, 2.0);
    const double value = contrastive_loss(reps, 0.1);
    EXPECT_GE(value, 0.0);
    EXPECT_NEAR(tape_contrastive(reps, 0.1), value, 1e-9 * std::max(1.0, value));
  }
}

TEST(TotalLoss, ZeroForPerfectReconstructionAndZeroResiduals) {
  auto spec = make_spec(2, 8);
  spec.contrastive_weight = 0.0;
  auto model = identity_model<float>(4, spec);
  QuantizerBatch<float> batch;
  batch.inputs.push_back(Tensor<float>(Shape{4, 4}, {1, 2, 3, 4, 0.5f, 0.5f, 1, 1, 2, 0, 0, 1, 0.25f, 3, 1, 2}));
  model.codebooks[0].value.fill(50.0f);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto row = batch.inputs[0].row(i);
    std::copy(row.begin(), row.end(), model.codebooks[0].value.row(i + 2).begin());
  }
  model.codebooks[1].value.fill(9.0f);
  std::fill(model.codebooks[1].value.row(3).begin(), model.codebooks[1].value.row(3).end(), 0.0f);
  Rng rng(28);
  for (int i = 0; i < 5; ++i) {
    const auto loss = total_loss(model, batch, rng);
    EXPECT_EQ(loss.total, 0.0);
    EXPECT_EQ(loss.recon, 0.0);
    EXPECT_EQ(loss.rq, 0.0);
    EXPECT_GT(loss.con, 0.0);
  }
}

QuantizerBatch<double> random_batch(const std::vector<std::size_t>& dims, std::size_t rows, Rng& rng) {
  QuantizerBatch<double> batch;
  // Float-representable so single-item paths, which take float embeddings, see the same inputs.
  for (std::size_t d : dims) batch.inputs.push_back(tensor_cast<double>(random_tensor<float>({rows, d}, rng)));
  return batch;
}

TEST(TotalLoss, BreakdownSumsToTotal) {
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 29);
  model.spec.contrastive_weight = 0.7;
  Rng rng(30);
  QuantizerBatch<float> batch;
  batch.inputs = {random_tensor<float>({16, 24}, rng), random_tensor<float>({16, 40}, rng)};
  for (int i = 0; i < 8; ++i) {
    const auto loss = total_loss(model, batch, rng);
    EXPECT_NEAR(loss.total, loss.recon + loss.rq + 0.7 * loss.con, 1e-6 * std::max(1.0, loss.total));
  }
}

TEST(TotalLoss, EqualsIndependentComponentRecomputation) {
  auto spec = make_spec(3, 8);
  RqVaeModel<double> model(make_dims({6, 10}, 12, 5, 8), spec, 31);
  Rng rng(32);
  const std::size_t rows = 8;
  const auto batch = random_batch({6, 10}, rows, rng);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng loss_rng(seed);
    const auto loss = total_loss(model, batch, loss_rng);

    double recon = 0.0, rq = 0.0;
    Tensor<double> reps(Shape{rows, 8});
    for (std::size_t i = 0; i < rows; ++i) {
      ItemEmbeddingSet item;
      for (const auto& t : batch.inputs) item.embeddings.emplace_back(t.row(i).begin(), t.row(i).end());
      const auto z = encode_fuse(model, item);
      const auto res = quantize(std::span<const double>(z), model, loss.rank);
      std::vector<std::vector<double>> xhat;
      for (auto& dec : model.decoders) {
        Tape<double> tape;
        xhat.push_back(decode(tape, dec, tape.constant(Tensor<double>(Shape{1, 8}, res.quantized))).value().data);
      }
      recon += recon_loss(item, xhat);
      rq += rq_loss(res, spec);
      std::copy(res.quantized.begin(), res.quantized.end(), reps.row(i).begin());
    }
    recon /= rows;
    rq /= rows;
    const double con = contrastive_loss(reps, spec.contrastive_temperature);
    EXPECT_NEAR(loss.recon, recon, 1e-9 * recon);
    EXPECT_NEAR(loss.rq, rq, 1e-9 * rq);
    EXPECT_NEAR(loss.con, con, 1e-9 * con);
    EXPECT_NEAR(loss.total, recon + rq + con, 1e-9 * loss.total);
  }
}

TEST(TotalLoss, LatentContrastiveInputUsesPreQuantizationVectors) {
  auto spec = make_spec(2, 4);
  RqVaeModel<double> model(make_dims({3}, 4, 3, 3), spec, 33);
  Rng rng(34);
  const auto batch = random_batch({3}, 6, rng);
  const auto snap = capture_snapshot(model, batch, 2);
  Tape<double> tape;
  const auto graph = build_total_loss(tape, model, batch, snap, ContrastiveInput::kLatent);
  EXPECT_NEAR(graph.con.value().item(), contrastive_loss(snap.latent, spec.contrastive_temperature), 1e-12);
}

// With the snapshot frozen the loss is smooth, so the straight-through
// gradient must agree with central differences.
TEST(StraightThrough, FrozenQuantizationMatchesFiniteDifferences) {
  for (auto mode : {MaskMode::kInclusive, MaskMode::kPaperLiteral}) {
    for (int rank = 1; rank <= 2; ++rank) {
      auto spec = make_spec(2, 4);
      spec.mask_mode = mode;
      RqVaeModel<double> model(make_dims({3, 4}, 5, 3, 4), spec, 35);
      Rng rng(36);
      // Zero-initialized biases would put a zero decoder input exactly on the ReLU kink.
      for (auto* p : model.parameters()) {
        if (p->value.rank() == 1) p->value = random_tensor<double>(p->value.shape, rng, 0.1);
      }
      const auto batch = random_batch({3, 4}, 6, rng);
      const auto snap = capture_snapshot(model, batch, rank);
      auto params = model.parameters();
      const auto report = finite_diff_check(
          [&](Tape<double>& tape) { return build_total_loss(tape, model, batch, snap).total; }, std::span(params),
          1e-6);
      EXPECT_LT(report.max_relative_error, 1e-4)
          << to_string(mode) << " rank " << rank << " worst " << report.worst_parameter;
      EXPECT_GT(report.coordinates, 100u);
    }
  }
}

TEST(StraightThrough, EncoderGradientFlowsThroughDecoder) {
  auto spec = make_spec(2, 4);
  spec.beta = 0.0;
  spec.contrastive_weight = 0.0;
  RqVaeModel<double> model(make_dims({3}, 5, 3, 4), spec, 37);
  Rng rng(38);
  const auto batch = random_batch({3}, 6, rng);
  const auto snap = capture_snapshot(model, batch, 2);
  Tape<double> tape;
  const auto graph = build_total_loss(tape, model, batch, snap);
  tape.backward(graph.recon);
  double norm = 0.0;
  for (double g : model.encoders[0].w1.grad.data) norm += g * g;
  EXPECT_GT(norm, 0.0);
}

// ---- training --------------------------------------------------------------

TEST(PairBatch, IsPerfectMatchingOfListedPairs) {
  const auto corpus = tagged_corpus(60, {3, 2}, 39);
  const auto pairs = neighbour_pairs(60);
  std::set<std::pair<std::size_t, std::size_t>> listed;
  for (const auto& p : pairs) listed.insert({p.first, p.second});
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const auto batch = sample_pair_batch(corpus, pairs, 12, rng);
    ASSERT_EQ(batch.rows(), 24u);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < 24; ++i) {
      const auto id = static_cast<std::size_t>(batch.inputs[0](i, 0));
      EXPECT_EQ(batch.inputs[1](i, 0), static_cast<float>(id));
      EXPECT_TRUE(seen.insert(id).second) << "item repeated in batch";
    }
    for (std::size_t i = 0; i < 12; ++i) {
      const auto a = static_cast<std::size_t>(batch.inputs[0](2 * i, 0));
      const auto b = static_cast<std::size_t>(batch.inputs[0](2 * i + 1, 0));
      EXPECT_TRUE(listed.count({a, b})) << a << "," << b;
    }
  }
}

TEST(PairBatch, ImpossibleRequestIsDataError) {
  const auto corpus = tagged_corpus(10, {2}, 41);
  const std::vector<ItemPair> star{{0, 1}, {0, 2}, {0, 3}};
  Rng rng(42);
  expect_error(ErrorKind::kData, [&] { sample_pair_batch(corpus, star, 2, rng); });
  const std::vector<ItemPair> outside{{0, 10}};
  expect_error(ErrorKind::kIndex, [&] { sample_pair_batch(corpus, outside, 2, rng); });
}

TEST(CodebookInit, KMeansPlusPlusLeavesNoEmptyCode) {
  const auto corpus = tagged_corpus(400, {24, 40}, 43);
  const auto pairs = neighbour_pairs(400);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, seed);
    Rng rng(seed);
    const auto batch = sample_pair_batch(corpus, pairs, 128, rng);
    initialize_codebooks(model, batch, rng);
    const auto results = quantize_batch(encode_batch(model, batch.inputs), model, 4);
    for (std::size_t l = 0; l < 4; ++l) {
      std::set<std::uint32_t> used;
      for (const auto& r : results) used.insert(r.codewords.codes[l]);
      EXPECT_EQ(used.size(), model.codebooks[l].value.rows()) << "level " << l + 1 << " seed " << seed;
    }
  }
}

QuantizerTrainConfig small_config(std::size_t steps) {
  QuantizerTrainConfig config;
  config.steps = steps;
  config.batch_pairs = 16;
  config.reseed_every = 5;
  config.seed = 44;
  return config;
}

TEST(TrainQuantizer, ZeroLearningRateLeavesParametersUnchanged) {
  const auto corpus = tagged_corpus(80, {24, 40}, 45);
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 46);
  const auto before = model;
  auto config = small_config(1);
  config.learning_rate = 0.0;
  config.kmeans_init = false;
  config.reseed_every = 0;
  train_quantizer(model, corpus, neighbour_pairs(80), config);
  const auto a = before.parameters();
  const auto b = model.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
}

TEST(TrainQuantizer, SameSeedGivesIdenticalParameters) {
  const auto corpus = tagged_corpus(80, {24, 40}, 47);
  const auto pairs = neighbour_pairs(80);
  RqVaeModel<float> first(QuantizerDims{}, SidSpec{}, 48);
  RqVaeModel<float> second(QuantizerDims{}, SidSpec{}, 48);
  const auto h1 = train_quantizer(first, corpus, pairs, small_config(12));
  const auto h2 = train_quantizer(second, corpus, pairs, small_config(12));
  ASSERT_EQ(h1.history.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(h1.history[i].loss.total, h2.history[i].loss.total);
  const auto a = first.parameters();
  const auto b = second.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
}

TEST(TrainQuantizer, LossFallsOnClusteredData) {
  // Items drawn around 8 centers; co-occurring items share a center.
  Rng rng(49);
  const std::size_t items = 256;
  EmbeddingCorpus corpus;
  corpus.dims = {24, 40};
  const auto centers_a = random_tensor<float>({8, 24}, rng);
  const auto centers_b = random_tensor<float>({8, 40}, rng);
  Tensor<float> a(Shape{items, 24}), b(Shape{items, 40});
  for (std::size_t i = 0; i < items; ++i) {
    corpus.item_ids.push_back(i);
    for (std::size_t j = 0; j < 24; ++j) a(i, j) = centers_a(i % 8, j) + 0.3f * static_cast<float>(rng.normal());
    for (std::size_t j = 0; j < 40; ++j) b(i, j) = centers_b(i % 8, j) + 0.3f * static_cast<float>(rng.normal());
  }
  corpus.modalities = {a, b};
  std::vector<ItemPair> pairs;
  for (std::size_t i = 0; i + 8 < items; ++i) pairs.push_back({i, i + 8});
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 50);
  auto config = small_config(300);
  config.batch_pairs = 32;
  config.reseed_every = 100;
  const auto result = train_quantizer(model, corpus, pairs, config);
  auto window_mean = [&](std::size_t from) {
    double s = 0;
    for (std::size_t i = from; i < from + 30; ++i) s += result.history[i].loss.total;
    return s / 30;
  };
  EXPECT_LT(window_mean(270), 0.8 * window_mean(0));
}

TEST(TrainQuantizer, WarnsOnCollapsedCodebook) {
  // Every item identical: only one code per level can ever be used.
  EmbeddingCorpus corpus;
  corpus.dims = {24, 40};
  corpus.modalities = {Tensor<float>(Shape{64, 24}, 0.5f), Tensor<float>(Shape{64, 40}, -0.5f)};
  for (std::size_t i = 0; i < 64; ++i) corpus.item_ids.push_back(i);
  RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 51);
  auto config = small_config(4);
  config.reseed_every = 0;
  const auto result = train_quantizer(model, corpus, neighbour_pairs(64), config);
  ASSERT_FALSE(result.warnings.empty());
  EXPECT_NE(result.warnings[0].find("below 5%"), std::string::npos) << result.warnings[0];
}

TEST(TrainQuantizer, LossHistoryFormat) {
  const std::vector<LossRecord> history{{1, {3.5, 1.0, 2.0, 0.5, 2}}, {2, {1.25, 0.25, 0.5, 0.5, 1}}};
  const auto path = testing::temp_path("loss_history.tsv");
  write_loss_history(path, history);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "1\t3.5\t1\t2\t0.5");
  std::getline(in, line);
  EXPECT_EQ(line, "2\t1.25\t0.25\t0.5\t0.5");
}

// ---- checkpoint ------------------------------------------------------------

void expect_same_model(const RqVaeModel<float>& a, const RqVaeModel<float>& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
  }
  EXPECT_EQ(a.dims.modality_dims, b.dims.modality_dims);
  EXPECT_EQ(a.dims.latent, b.dims.latent);
  EXPECT_EQ(a.spec.levels, b.spec.levels);
  EXPECT_EQ(a.spec.base_cardinality, b.spec.base_cardinality);
  EXPECT_EQ(a.spec.schedule, b.spec.schedule);
}

TEST(QuantizerCheckpoint, RoundTripsBitExactly) {
  const RqVaeModel<float> model(QuantizerDims{}, SidSpec{}, 52);
  const auto path = testing::temp_path("q.ckpt");
  save_quantizer(path, model);
  expect_same_model(model, load_quantizer(path));

  std::ifstream in(path, std::ios::binary);
  std::string magic(8, '\0');
  in.read(magic.data(), 8);
  EXPECT_EQ(magic, "PLUMQ001");
}

TEST(QuantizerCheckpoint, UniformScheduleSurvives) {
  auto spec = make_spec(3, 16);
  spec.schedule = CardinalitySchedule::kUniform;
  const RqVaeModel<float> model(make_dims({5}, 6, 4, 4), spec, 53);
  const auto path = testing::temp_path("q_uniform.ckpt");
  save_quantizer(path, model);
  expect_same_model(model, load_quantizer(path));
}

TEST(QuantizerCheckpoint, RejectsForeignFile) {
  const auto path = testing::temp_path("not_a_ckpt");
  std::ofstream(path) << "PLUMLM01 and some more bytes";
  expect_error(ErrorKind::kData, [&] { load_quantizer(path); });
  expect_error(ErrorKind::kIo, [&] { load_quantizer(path + ".missing"); });
}

}  // namespace
}  // namespace sidrec
