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

#include "sidrec/datagen/render.hpp"
#include "sidrec/lm/checkpoint.hpp"
#include "sidrec/lm/flops.hpp"
#include "sidrec/lm/train.hpp"
#include "sidrec/numerics/gradcheck.hpp"
#include "test_util.hpp"

namespace sidrec {
namespace {

using testing::expect_error;

ModelDims tiny_dims(std::size_t layers = 2, std::size_t dim = 16, std::size_t heads = 2) {
  ModelDims d;
  d.layers = layers;
  d.dim = dim;
  d.heads = heads;
  d.ff = 2 * dim;
  d.max_len = 64;
  return d;
}

std::vector<std::uint32_t> random_tokens(std::size_t len, std::size_t vocab, Rng& rng) {
  std::vector<std::uint32_t> out(len);
  for (auto& t : out) t = static_cast<std::uint32_t>(rng.index(vocab));
  return out;
}

// Randomizes norms and biases too so the oracle exercises every parameter.
template <typename Real>
void perturb_all(SequenceModel<Real>& model, Rng& rng, double scale) {
  for (auto* p : model.parameters()) {
    for (auto& v : p->value.data) v += static_cast<Real>(scale * rng.normal());
  }
}

// Straight-line forward pass over one sequence, written without the tape.
std::vector<std::vector<double>> oracle_logits(const SequenceModel<double>& m, const std::vector<std::uint32_t>& seq) {
  const std::size_t D = m.dims.dim, T = seq.size(), H = m.dims.heads, hd = D / H;
  using Mat = std::vector<std::vector<double>>;
  auto linear = [](const Mat& x, const Tensor<double>& w, const Tensor<double>& b) {
    Mat y(x.size(), std::vector<double>(w.shape[1]));
    for (std::size_t t = 0; t < x.size(); ++t) {
      for (std::size_t j = 0; j < w.shape[1]; ++j) {
        double acc = b.data[j];
        for (std::size_t i = 0; i < w.shape[0]; ++i) acc += x[t][i] * w(i, j);
        y[t][j] = acc;
      }
    }
    return y;
  };
  auto norm = [](const Mat& x, const Tensor<double>& g, const Tensor<double>& b) {
    Mat y = x;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double n = static_cast<double>(x[t].size());
      double mean = 0, var = 0;
      for (double v : x[t]) mean += v / n;
      for (double v : x[t]) var += (v - mean) * (v - mean) / n;
      for (std::size_t j = 0; j < x[t].size(); ++j) y[t][j] = (x[t][j] - mean) / std::sqrt(var + 1e-5) * g.data[j] + b.data[j];
    }
    return y;
  };
  Mat x(T, std::vector<double>(D));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < D; ++j) x[t][j] = m.token_embedding.value(seq[t], j) + m.position_embedding.value(t, j);
  }
  for (const auto& b : m.blocks) {
    const Mat qkv = linear(norm(x, b.ln1_gain.value, b.ln1_bias.value), b.qkv_w.value, b.qkv_b.value);
    Mat attn(T, std::vector<double>(D, 0.0));
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> w(t + 1);
        double mx = -1e300, z = 0;
        for (std::size_t u = 0; u <= t; ++u) {
          double s = 0;
          for (std::size_t j = 0; j < hd; ++j) s += qkv[t][h * hd + j] * qkv[u][D + h * hd + j];
          w[u] = s / std::sqrt(static_cast<double>(hd));
          mx = std::max(mx, w[u]);
        }
        for (auto& v : w) z += v = std::exp(v - mx);
        for (std::size_t u = 0; u <= t; ++u) {
          for (std::size_t j = 0; j < hd; ++j) attn[t][h * hd + j] += w[u] / z * qkv[u][2 * D + h * hd + j];
        }
      }
    }
    const Mat proj = linear(attn, b.proj_w.value, b.proj_b.value);
    for (std::size_t t = 0; t < T; ++t) for (std::size_t j = 0; j < D; ++j) x[t][j] += proj[t][j];
    Mat f = linear(norm(x, b.ln2_gain.value, b.ln2_bias.value), b.ff1_w.value, b.ff1_b.value);
    for (auto& row : f) {
      for (auto& v : row) v = 0.5 * v * (1 + std::tanh(std::sqrt(2 / M_PI) * (v + 0.044715 * v * v * v)));
    }
    const Mat out = linear(f, b.ff2_w.value, b.ff2_b.value);
    for (std::size_t t = 0; t < T; ++t) for (std::size_t j = 0; j < D; ++j) x[t][j] += out[t][j];
  }
  x = norm(x, m.final_gain.value, m.final_bias.value);
  Mat logits(T, std::vector<double>(m.vocab_size));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t v = 0; v < m.vocab_size; ++v) {
      double acc = 0;
      for (std::size_t j = 0; j < D; ++j) acc += x[t][j] * m.token_embedding.value(v, j);
      logits[t][v] = acc;
    }
  }
  return logits;
}

// Small synthetic world with topic-led SIDs.
struct World {
  SynthConfig config;
  SyntheticWorld synth;
  std::vector<Session> sessions;
  ItemCatalog catalog;
  SidTable table;
  Vocabulary vocab;
};

World make_world(std::uint64_t seed) {
  World w;
  w.config.items = 200;
  w.config.topics = 8;
  w.config.sessions = 300;
  w.config.channels = 10;
  w.config.title_words = 32;
  w.config.users = 50;
  w.config.min_session = 3;
  w.config.max_session = 8;
  w.synth = gen_corpus(w.config, seed);
  w.sessions = gen_sessions(w.config, w.synth, seed);
  w.catalog = ItemCatalog(w.synth.meta);
  std::vector<std::pair<std::uint64_t, SemanticId>> entries;
  for (std::size_t i = 0; i < w.config.items; ++i) {
    const auto u = static_cast<std::uint32_t>(i);
    entries.emplace_back(i, SemanticId{{w.synth.item_topic[i], u % 4, (u / 4) % 4, (u / 16) % 4}});
  }
  w.table = SidTable::build(std::move(entries));
  VocabSpec spec;
  spec.sid_cardinalities = {8, 4, 4, 4};
  spec.channels = 10;
  spec.title_words = 32;
  spec.topics = 8;
  w.vocab = Vocabulary(spec);
  return w;
}

TEST(ModelDims, RejectsHeadsThatDoNotDivide) {
  expect_error(ErrorKind::kConfig, [] { tiny_dims(1, 10, 3).validate(); }, "divisible");
  expect_error(ErrorKind::kConfig, [] { SequenceModel<float>(tiny_dims(), 0, 1); });
}

TEST(SequenceModel, MatchesStraightLineOracle) {
  Rng rng(1);
  SequenceModel<double> model(tiny_dims(2, 8, 2), 11, 2);
  perturb_all(model, rng, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto seq = random_tokens(1 + rng.index(9), 11, rng);
    TokenBatch batch;
    batch.add(seq);
    const auto got = forward_logits(model, batch);
    const auto want = oracle_logits(model, seq);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (std::size_t v = 0; v < 11; ++v) EXPECT_NEAR(got(t, v), want[t][v], 1e-10);
    }
  }
}

TEST(SequenceModel, PrefixLogitsIgnoreLaterTokensBitwise) {
  Rng rng(3);
  SequenceModel<float> model(tiny_dims(), 30, 4);
  perturb_all(model, rng, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t len = 2 + rng.index(20);
    auto seq = random_tokens(len, 30, rng);
    const std::size_t t = 1 + rng.index(len - 1);
    TokenBatch a, b;
    a.add(seq);
    seq[t] = static_cast<std::uint32_t>((seq[t] + 1 + rng.index(29)) % 30);
    b.add(seq);
    const auto la = forward_logits(model, a), lb = forward_logits(model, b);
    for (std::size_t i = 0; i < t * 30; ++i) ASSERT_EQ(la.data[i], lb.data[i]) << "trial " << trial;
  }
}

TEST(SequenceModel, BatchingDoesNotChangeRows) {
  Rng rng(5);
  SequenceModel<float> model(tiny_dims(), 30, 6);
  const auto s1 = random_tokens(7, 30, rng), s2 = random_tokens(12, 30, rng);
  TokenBatch both, alone;
  both.add(s1);
  both.add(s2);
  both.add(s1);
  alone.add(s2);
  const auto lb = forward_logits(model, both), la = forward_logits(model, alone);
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t v = 0; v < 30; ++v) EXPECT_EQ(lb(t, v), lb(19 + t, v));
  }
  for (std::size_t t = 0; t < 12; ++t) {
    for (std::size_t v = 0; v < 30; ++v) EXPECT_FLOAT_EQ(lb(7 + t, v), la(t, v));
  }
  const auto last = last_logits(model, both);
  for (std::size_t v = 0; v < 30; ++v) EXPECT_EQ(last(1, v), lb(18, v));
}

TEST(PromptCache, ContinuationsMatchFullForwardBitwise) {
  Rng rng(15);
  SequenceModel<float> model(tiny_dims(3, 16, 4), 40, 16);
  perturb_all(model, rng, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    TokenBatch prompts;
    std::vector<std::vector<std::uint32_t>> prompt_tokens;
    for (int p = 0; p < 3; ++p) {
      prompt_tokens.push_back(random_tokens(1 + rng.index(20), 40, rng));
      prompts.add(prompt_tokens.back());
    }
    const auto cache = encode_prompts(model, prompts);
    const auto direct = last_logits(model, prompts);
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t v = 0; v < 40; ++v) EXPECT_EQ(cache[p].last_logits[v], direct(p, v));
    }

    TokenBatch suffixes, joined;
    std::vector<std::size_t> owner;
    for (int i = 0; i < 5; ++i) {
      owner.push_back(rng.index(3));
      const auto suffix = random_tokens(1 + rng.index(4), 40, rng);
      suffixes.add(suffix);
      auto full = prompt_tokens[owner.back()];
      full.insert(full.end(), suffix.begin(), suffix.end());
      joined.add(full);
    }
    const auto got = continuation_logits(model, cache, std::span<const std::size_t>(owner), suffixes);
    const auto want = last_logits(model, joined);
    ASSERT_EQ(got.shape, want.shape);
    EXPECT_EQ(got.data, want.data) << "trial " << trial;
  }
}

TEST(PromptCache, RejectsOverlongAndForeignInputs) {
  SequenceModel<float> model(tiny_dims(), 30, 17);
  TokenBatch prompts;
  prompts.add(std::vector<std::uint32_t>(model.dims.max_len - 1, 3));
  const auto cache = encode_prompts(model, prompts);
  TokenBatch two;
  two.add(std::vector<std::uint32_t>{1, 2});
  const std::vector<std::size_t> owner{0}, bad_owner{1};
  expect_error(ErrorKind::kDimension, [&] { continuation_logits(model, cache, owner, two); });
  TokenBatch one;
  one.add(std::vector<std::uint32_t>{30});
  expect_error(ErrorKind::kIndex, [&] { continuation_logits(model, cache, owner, one); });
  expect_error(ErrorKind::kIndex, [&] { continuation_logits(model, cache, bad_owner, two); });
}

TEST(SequenceModel, RejectsBadTokensAndLengths) {
  SequenceModel<float> model(tiny_dims(), 30, 7);
  TokenBatch bad;
  bad.add(std::vector<std::uint32_t>{1, 30});
  expect_error(ErrorKind::kIndex, [&] { forward_logits(model, bad); });
  TokenBatch longer;
  longer.add(std::vector<std::uint32_t>(65, 1));
  expect_error(ErrorKind::kDimension, [&] { forward_logits(model, longer); }, "65 tokens");
}

TEST(NextTokenLoss, GraphMatchesInference) {
  Rng rng(8);
  SequenceModel<float> model(tiny_dims(), 30, 9);
  std::vector<std::vector<std::uint32_t>> seqs;
  TokenBatch batch;
  for (int i = 0; i < 5; ++i) {
    seqs.push_back(random_tokens(3 + rng.index(10), 30, rng));
    batch.add(seqs.back());
  }
  Tape<float> tape;
  EXPECT_NEAR(next_token_loss(tape, model, batch).value().item(), mean_next_token_loss(model, seqs), 1e-5);
}

TEST(SftLoss, EqualsCrossEntropyAtLabelPositions) {
  const auto w = make_world(10);
  auto examples = sft_candidates(w.sessions, w.catalog, w.table, w.vocab, PromptOptions{});
  examples.resize(6);
  SequenceModel<double> model(tiny_dims(), w.vocab.size(), 11);
  Rng rng(12);
  perturb_all(model, rng, 0.05);
  std::vector<const SftExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  Tape<double> tape;
  const double got = sft_loss(tape, model, ptrs, w.vocab).value().item();

  double want = 0;
  for (const auto& e : examples) {
    auto seq = e.prompt;
    seq.insert(seq.end(), e.label.begin(), e.label.end());
    TokenBatch b;
    b.add(seq);
    const auto logits = forward_logits(model, b);
    for (std::size_t k = 0; k < e.label.size(); ++k) {
      const auto row = logits.row(e.prompt.size() - 1 + k);
      double z = 0;
      for (double v : row) z += std::exp(v);
      want -= row[e.label[k]] - std::log(z);
    }
  }
  EXPECT_NEAR(got, want / static_cast<double>(examples.size() * 4), 1e-10);
}

TEST(SftLoss, FiniteDifferencesAgree) {
  const auto w = make_world(13);
  auto examples = sft_candidates(w.sessions, w.catalog, w.table, w.vocab, PromptOptions{2, true});
  examples.resize(3);
  SequenceModel<double> model(tiny_dims(1, 8, 2), w.vocab.size(), 14);
  Rng rng(15);
  perturb_all(model, rng, 0.1);
  std::vector<const SftExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  auto params = model.parameters();
  // Gradients below 1e-5 are compared in absolute terms: at a loss near 5,
  // central differences carry about 1e-11 of rounding noise.
  const auto report = finite_diff_check([&](Tape<double>& t) { return sft_loss(t, model, ptrs, w.vocab); },
                                        std::span<Parameter<double>* const>(params), 1e-5, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-4)
      << report.worst_parameter << "[" << report.worst_index << "] " << report.analytic << " vs " << report.numeric;
  EXPECT_GT(report.coordinates, 1000u);
}

TEST(SftBatch, RejectsNonSidLabels) {
  const auto w = make_world(16);
  auto ex = make_sft_example(w.sessions[0], 1, w.catalog, w.table, w.vocab, PromptOptions{});
  ex.label[2] = w.vocab.sid_token(1, 0);
  std::vector<std::size_t> rows, targets;
  expect_error(ErrorKind::kData, [&] { pack_sft_batch({&ex}, w.vocab, rows, targets); }, "level-3");
}

TEST(Prompt, LayoutAndHistoryToggle) {
  const auto w = make_world(17);
  const auto& s = w.sessions[0];
  ASSERT_GE(s.events.size(), 3u);
  const std::size_t click = s.events.size() - 1;
  const auto full = make_sft_example(s, click, w.catalog, w.table, w.vocab, PromptOptions{100, true});
  const auto bare = make_sft_example(s, click, w.catalog, w.table, w.vocab, PromptOptions{100, false});
  EXPECT_EQ(full.prompt.size(), 1 + 8 * (click - 1) + 3 + 4 + 1 + 1);
  EXPECT_EQ(bare.prompt.size(), 1u + 3 + 4 + 1 + 1);
  EXPECT_EQ(full.prompt.front(), Vocabulary::kBos);
  EXPECT_EQ(full.prompt.back(), Vocabulary::kSep);
  EXPECT_EQ(full.label, sid_tokens(s.events[click].item_id, w.table, w.vocab));
  EXPECT_EQ(full.item_id, s.events[click].item_id);
  EXPECT_EQ(bare.label, full.label);
  // The bare prompt is the tail of the full one after <bos>.
  EXPECT_TRUE(std::equal(bare.prompt.begin() + 1, bare.prompt.end(), full.prompt.end() - (bare.prompt.size() - 1)));
  const auto capped = make_sft_example(s, click, w.catalog, w.table, w.vocab, PromptOptions{1, true});
  EXPECT_EQ(capped.prompt.size(), bare.prompt.size() + (click >= 2 ? 8 : 0));
  expect_error(ErrorKind::kIndex, [&] { make_sft_example(s, 0, w.catalog, w.table, w.vocab, PromptOptions{}); });
}

std::vector<SftExample> with_rewards(std::vector<double> rewards) {
  std::vector<SftExample> out;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    SftExample e;
    e.item_id = i;
    e.reward = rewards[i];
    out.push_back(e);
  }
  return out;
}

TEST(RewardSampling, AcceptanceFollowsNormalizedReward) {
  const auto cands = with_rewards({0.5, 1.0, 1.5, 2.0});
  std::vector<double> counts(4, 0);
  Rng rng(18);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    for (const auto& e : sample_sft_examples(cands, rng)) counts[e.item_id] += 1;
  }
  // Each count is binomial; the summed squared z-scores are chi-square with
  // 3 free cells (the max-reward cell is deterministic). 16.27 is p = 0.001.
  double chi2 = 0;
  for (int i = 0; i < 3; ++i) {
    const double p = cands[i].reward / 2.0;
    chi2 += std::pow(counts[i] - draws * p, 2) / (draws * p * (1 - p));
  }
  EXPECT_LT(chi2, 16.27);
  EXPECT_EQ(counts[3], draws);
}

TEST(RewardSampling, UniformRewardsAcceptEveryExampleEqually) {
  const auto cands = with_rewards(std::vector<double>(50, 0.7));
  Rng rng(19);
  for (int d = 0; d < 100; ++d) EXPECT_EQ(sample_sft_examples(cands, rng).size(), 50u);
}

TEST(RewardSampling, SingleNonzeroAndAllZero) {
  Rng rng(20);
  const auto one = sample_sft_examples(with_rewards({0, 0, 3, 0}), rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].item_id, 2u);
  std::vector<std::string> warnings;
  EXPECT_TRUE(sample_sft_examples(with_rewards({0, 0, 0}), rng, &warnings).empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("zero"), std::string::npos);
  expect_error(ErrorKind::kData, [&] { sample_sft_examples(with_rewards({1, -1}), rng); });
}

TEST(RewardSampling, InvariantToRewardScale) {
  Rng gen(21);
  std::vector<double> r(200);
  for (auto& v : r) v = gen.uniform();
  std::vector<double> scaled(r);
  for (auto& v : scaled) v *= 8;
  Rng a(22), b(22);
  const auto x = sample_sft_examples(with_rewards(r), a);
  const auto y = sample_sft_examples(with_rewards(scaled), b);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].item_id, y[i].item_id);
}

TEST(Flops, HandCountAndLinearity) {
  ModelDims d;
  d.layers = 2;
  d.dim = 64;
  d.ff = 256;
  // Per block: norms 4*64, qkv 3*64*64+192, proj 64*64+64, ff 64*256+256 and 256*64+64.
  const std::size_t block = 256 + 12288 + 192 + 4096 + 64 + 16384 + 256 + 16384 + 64;
  EXPECT_EQ(block, 49984u);
  EXPECT_EQ(non_embedding_params(d), 2 * block + 128);
  EXPECT_DOUBLE_EQ(flops_per_step(d, 1000, 8, 128), 6.0 * (100096.0 + 64000.0) * 1024.0);
  EXPECT_DOUBLE_EQ(flops_per_step(d, 1000, 16, 128), 2 * flops_per_step(d, 1000, 8, 128));
  d.layers = 0;
  EXPECT_DOUBLE_EQ(flops_per_step(d, 1000, 8, 128), 6.0 * (128.0 + 64000.0) * 1024.0);
}

CptData random_cpt(std::size_t vocab, Rng& rng) {
  CptData data;
  for (int i = 0; i < 40; ++i) data.train.push_back(wrap_sequence(random_tokens(6, vocab, rng), 64));
  return data;
}

TEST(CptTrain, ZeroLearningRateLeavesModelUnchanged) {
  Rng rng(23);
  SequenceModel<float> model(tiny_dims(), 30, 24);
  const auto before = model.cast<double>();
  LmTrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0;
  cpt_train(model, random_cpt(30, rng), cfg);
  const auto after = model.cast<double>();
  const auto pb = before.parameters(), pa = after.parameters();
  for (std::size_t i = 0; i < pb.size(); ++i) EXPECT_EQ(pb[i]->value, pa[i]->value) << pb[i]->name;
}

TEST(CptTrain, DeterministicAndLogsFlops) {
  Rng rng(25);
  const auto data = random_cpt(30, rng);
  LmTrainConfig cfg;
  cfg.steps = 6;
  cfg.batch_size = 3;
  cfg.eval_every = 2;
  SequenceModel<float> a(tiny_dims(), 30, 26), b(tiny_dims(), 30, 26);
  const auto ra = cpt_train(a, data, cfg);
  const auto rb = cpt_train(b, data, cfg);
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  ASSERT_EQ(ra.log.size(), 6u);
  // Every sequence is 8 tokens, so each step costs the same.
  const double per_step = flops_per_step(a.dims, 30, 3, 8);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(ra.log[i].step, i + 1);
    EXPECT_DOUBLE_EQ(ra.log[i].cumulative_flops, per_step * static_cast<double>(i + 1));
    EXPECT_EQ(ra.log[i].loss, rb.log[i].loss);
  }
}

TEST(CptTrain, HookRunsAtScheduleAndEvaluationIsPure) {
  Rng rng(27);
  SequenceModel<float> model(tiny_dims(), 30, 28);
  LmTrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 2;
  cfg.eval_every = 2;
  std::vector<std::size_t> at;
  cpt_train(model, random_cpt(30, rng), cfg, [&](std::size_t step, const SequenceModel<float>& m) {
    at.push_back(step);
    const auto copy = m.cast<double>();
    mean_next_token_loss(m, {{1, 2, 3, 4}});
    const auto again = m.cast<double>();
    for (std::size_t i = 0; i < copy.parameters().size(); ++i) {
      EXPECT_EQ(copy.parameters()[i]->value, again.parameters()[i]->value);
    }
  });
  EXPECT_EQ(at, (std::vector<std::size_t>{0, 2, 4, 5}));
}

TEST(CptTrain, HeldOutMetadataLossDecreases) {
  const auto w = make_world(29);
  std::vector<std::uint64_t> train_items, held_items;
  for (std::size_t i = 0; i < w.config.items; ++i) (i % 10 == 9 ? held_items : train_items).push_back(i);
  MixtureOptions mix;
  mix.examples = 1500;
  mix.max_history = 4;
  CptData data;
  for (const auto& ex : render_cpt_mixture(w.sessions, train_items, w.catalog, w.table, w.vocab, mix)) {
    data.train.push_back(wrap_sequence(ex.tokens, 64));
  }
  for (auto item : held_items) {
    data.heldout_metadata.push_back(wrap_sequence(render_topics(w.catalog.at(item), w.table, w.vocab).tokens, 64));
    data.heldout_metadata.push_back(wrap_sequence(render_title(w.catalog.at(item), w.table, w.vocab).tokens, 64));
  }
  SequenceModel<float> model(tiny_dims(1, 32, 2), w.vocab.size(), 30);
  LmTrainConfig cfg;
  cfg.steps = 150;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  cfg.eval_every = 50;
  const auto result = cpt_train(model, data, cfg);
  std::vector<double> held;
  for (const auto& r : result.log) {
    if (r.split == "heldout_metadata") held.push_back(r.loss);
  }
  ASSERT_EQ(held.size(), 4u);
  EXPECT_LT(held.back(), held.front() - 0.5);
}

TEST(SftTrain, OverfitsSingleExample) {
  const auto w = make_world(31);
  const auto ex = make_sft_example(w.sessions[3], 2, w.catalog, w.table, w.vocab, PromptOptions{});
  SequenceModel<float> model(tiny_dims(2, 32, 4), w.vocab.size(), 32);
  LmTrainConfig cfg;
  cfg.steps = 2000;
  cfg.batch_size = 1;
  cfg.learning_rate = 3e-3;
  cfg.eval_every = 50;
  double loglik = -1e9;
  std::size_t reached = 0;
  const auto log_likelihood = [&](const SequenceModel<float>& m) {
    auto seq = ex.prompt;
    seq.insert(seq.end(), ex.label.begin(), ex.label.end() - 1);
    TokenBatch b;
    b.add(seq);
    const auto logits = forward_logits(m, b);
    double ll = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto row = logits.row(ex.prompt.size() - 1 + k);
      double z = 0;
      for (float v : row) z += std::exp(static_cast<double>(v));
      ll += row[ex.label[k]] - std::log(z);
    }
    return ll;
  };
  sft_train(model, {ex}, w.vocab, cfg, [&](std::size_t step, const SequenceModel<float>& m) {
    loglik = log_likelihood(m);
    if (reached == 0 && loglik > -0.1) reached = step;
  });
  EXPECT_GT(reached, 0u);
  EXPECT_GT(loglik, -0.1);
}

TEST(LmCheckpoint, RoundTripsAndZeroStepsKeepsInit) {
  const auto w = make_world(33);
  SequenceModel<float> model(tiny_dims(), w.vocab.size(), 34);
  const auto init = model.cast<double>();
  LmTrainConfig cfg;
  cfg.steps = 0;
  sft_train(model, {}, w.vocab, cfg);
  const auto path = testing::temp_path("lm.ckpt");
  save_lm(path, model, w.vocab.spec());
  const auto back = load_lm(path);
  EXPECT_EQ(back.vocab, w.vocab.spec());
  EXPECT_EQ(back.model.dims, model.dims);
  const auto pi = init.parameters();
  const auto pb = back.model.parameters();
  ASSERT_EQ(pi.size(), pb.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    EXPECT_EQ(pb[i]->name, pi[i]->name);
    EXPECT_EQ(tensor_cast<double>(pb[i]->value), pi[i]->value);
  }
}

TEST(LmCheckpoint, CorruptFilesAreRejected) {
  const auto w = make_world(35);
  SequenceModel<float> model(tiny_dims(), w.vocab.size(), 36);
  const auto path = testing::temp_path("lm_bad.ckpt");
  save_lm(path, model, w.vocab.spec());
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  std::ofstream(path, std::ios::binary) << bytes.substr(0, bytes.size() - 100);
  expect_error(ErrorKind::kData, [&] { load_lm(path); });
  std::ofstream(path, std::ios::binary) << "NOTMAGIC";
  expect_error(ErrorKind::kData, [&] { load_lm(path); });
  VocabSpec other = w.vocab.spec();
  other.topics += 1;
  expect_error(ErrorKind::kDimension, [&] { save_lm(path, model, other); });
}

}  // namespace
}  // namespace sidrec
