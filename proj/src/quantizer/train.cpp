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

#include "sidrec/quantizer/train.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "sidrec/common/error.hpp"
#include "sidrec/numerics/adam.hpp"
#include "sidrec/numerics/kernels.hpp"

namespace sidrec {
namespace {

constexpr double kMinUtilization = 0.05;
constexpr std::size_t kMaxBatchAttempts = 64;

double row_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

// Greedy draw of pairs in a shuffled order, skipping any pair that would
// repeat an item. Retried with a fresh order when too few pairs fit.
std::vector<ItemPair> draw_matching(const std::vector<ItemPair>& pairs, std::size_t wanted, std::size_t corpus_size,
                                    Rng& rng) {
  std::vector<std::size_t> order(pairs.size());
  std::vector<char> used(corpus_size);
  for (std::size_t attempt = 0; attempt < kMaxBatchAttempts; ++attempt) {
    std::iota(order.begin(), order.end(), 0);
    std::fill(used.begin(), used.end(), 0);
    std::vector<ItemPair> chosen;
    for (std::size_t i = 0; i < order.size() && chosen.size() < wanted; ++i) {
      std::swap(order[i], order[i + rng.index(order.size() - i)]);
      const auto& p = pairs[order[i]];
      if (p.first == p.second || used[p.first] || used[p.second]) continue;
      used[p.first] = used[p.second] = 1;
      chosen.push_back(p);
    }
    if (chosen.size() == wanted) return chosen;
  }
  fail(ErrorKind::kData, "cannot draw " + std::to_string(wanted) + " item-disjoint co-occurrence pairs from " +
                             std::to_string(pairs.size()) + " pairs");
}

// k-means++: first center uniform, then proportional to squared distance to
// the nearest chosen center. Falls back to uniform draws once every point is
// already a center.
std::vector<std::size_t> kmeans_pp(const std::vector<double>& points, std::size_t rows, std::size_t d,
                                   std::size_t k, Rng& rng) {
  std::vector<std::size_t> centers{rng.index(rows)};
  std::vector<double> nearest(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    nearest[i] = row_distance(&points[i * d], &points[centers[0] * d], d);
  }
  while (centers.size() < k) {
    const double mass = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = rows - 1;
    if (mass > 0.0) {
      while (nearest[pick] == 0.0) --pick;
      double target = rng.uniform() * mass;
      for (std::size_t i = 0; i < rows; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(rows);
    }
    centers.push_back(pick);
    for (std::size_t i = 0; i < rows; ++i) {
      nearest[i] = std::min(nearest[i], row_distance(&points[i * d], &points[pick * d], d));
    }
  }
  return centers;
}

double row_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = static_cast<double>(a[j]) - b[j];
    s += diff * diff;
  }
  return s;
}

}  // namespace

QuantizerBatch<float> sample_pair_batch(const EmbeddingCorpus& corpus, const std::vector<ItemPair>& pairs,
                                        std::size_t batch_pairs, Rng& rng) {
  if (batch_pairs < 2) fail(ErrorKind::kConfig, "batch_pairs must be at least 2");
  for (const auto& p : pairs) {
    if (p.first >= corpus.size() || p.second >= corpus.size()) {
      fail(ErrorKind::kIndex, "co-occurrence pair references row outside the corpus");
    }
  }
  const auto chosen = draw_matching(pairs, batch_pairs, corpus.size(), rng);
  QuantizerBatch<float> batch;
  for (std::size_t m = 0; m < corpus.modality_count(); ++m) {
    const std::size_t dim = corpus.dims[m];
    Tensor<float> t(Shape{2 * batch_pairs, dim});
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto a = corpus.modalities[m].row(chosen[i].first);
      const auto b = corpus.modalities[m].row(chosen[i].second);
      std::copy(a.begin(), a.end(), t.row(2 * i).begin());
      std::copy(b.begin(), b.end(), t.row(2 * i + 1).begin());
    }
    batch.inputs.push_back(std::move(t));
  }
  return batch;
}

void initialize_codebooks(RqVaeModel<float>& model, const QuantizerBatch<float>& batch, Rng& rng) {
  const auto latent = encode_batch(model, batch.inputs);
  const std::size_t rows = latent.rows();
  const std::size_t d = latent.cols();
  std::vector<double> residual(latent.data.begin(), latent.data.end());
  std::vector<std::uint32_t> codes(rows);
  for (auto& book : model.codebooks) {
    const std::size_t k = book.value.rows();
    const auto centers = kmeans_pp(residual, rows, d, k, rng);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) book.value(c, j) = static_cast<float>(residual[centers[c] * d + j]);
    }
    const std::vector<double> book_d(book.value.data.begin(), book.value.data.end());
    kernels::nearest_rows(residual.data(), rows, book_d.data(), k, d, codes.data());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < d; ++j) residual[i * d + j] -= book_d[codes[i] * d + j];
    }
  }
}

QuantizerTrainResult train_quantizer(RqVaeModel<float>& model, const EmbeddingCorpus& corpus,
                                     const std::vector<ItemPair>& pairs, const QuantizerTrainConfig& config) {
  if (corpus.size() == 0) fail(ErrorKind::kData, "quantizer training corpus is empty");
  if (pairs.empty()) fail(ErrorKind::kData, "no co-occurrence pairs to train on");
  model.validate();
  Rng rng(config.seed);
  AdamState<float> adam;
  adam.config.learning_rate = config.learning_rate;
  auto params = model.parameters();

  const std::size_t levels = model.codebooks.size();
  const std::size_t epoch_steps = std::max<std::size_t>(1, corpus.size() / (2 * config.batch_pairs));
  std::vector<std::vector<char>> epoch_use(levels), reseed_use(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    epoch_use[l].assign(model.codebooks[l].value.rows(), 0);
    reseed_use[l].assign(model.codebooks[l].value.rows(), 0);
  }

  QuantizerTrainResult result;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto batch = sample_pair_batch(corpus, pairs, config.batch_pairs, rng);
    if (step == 0 && config.kmeans_init) initialize_codebooks(model, batch, rng);
    const int rank = sample_mask_rank(model.spec, rng);
    const auto snapshot = capture_snapshot(model, batch, rank);
    for (std::size_t l = 0; l < levels; ++l) {
      for (std::size_t c : snapshot.codes[l]) epoch_use[l][c] = reseed_use[l][c] = 1;
    }

    Tape<float> tape;
    const auto graph = build_total_loss(tape, model, batch, snapshot, config.contrastive_input);
    for (auto* p : params) p->zero_grad();
    tape.backward(graph.total);
    adam_step(params, adam);
    result.history.push_back({step + 1,
                              {graph.total.value().item(), graph.recon.value().item(), graph.rq.value().item(),
                               graph.con.value().item(), rank}});

    if ((step + 1) % epoch_steps == 0) {
      for (std::size_t l = 0; l < levels; ++l) {
        const auto used = static_cast<std::size_t>(std::count(epoch_use[l].begin(), epoch_use[l].end(), 1));
        const double share = static_cast<double>(used) / static_cast<double>(epoch_use[l].size());
        if (share < kMinUtilization) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "step %zu: level %zu uses %zu of %zu codes (%.1f%%), below 5%%", step + 1,
                        l + 1, used, epoch_use[l].size(), 100.0 * share);
          result.warnings.emplace_back(buf);
        }
        std::fill(epoch_use[l].begin(), epoch_use[l].end(), 0);
      }
    }

    if (config.reseed_every > 0 && (step + 1) % config.reseed_every == 0) {
      // Dead codes move onto the batch residuals that their level fits worst.
      const std::size_t rows = batch.rows();
      for (std::size_t l = 0; l < levels; ++l) {
        std::vector<std::pair<double, std::size_t>> misfit(rows);
        for (std::size_t i = 0; i < rows; ++i) {
          misfit[i] = {row_distance(snapshot.residual_in[l].row(i), snapshot.code_values[l].row(i)), i};
        }
        std::stable_sort(misfit.begin(), misfit.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t next = 0;
        auto& book = model.codebooks[l].value;
        for (std::size_t c = 0; c < book.rows() && next < rows; ++c) {
          if (reseed_use[l][c]) continue;
          const auto src = snapshot.residual_in[l].row(misfit[next++].second);
          std::copy(src.begin(), src.end(), book.row(c).begin());
        }
        std::fill(reseed_use[l].begin(), reseed_use[l].end(), 0);
      }
    }
  }
  return result;
}

void write_loss_history(const std::string& path, const std::vector<LossRecord>& history) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write loss history to " + path);
  char buf[192];
  for (const auto& rec : history) {
    std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%.9g\t%.9g\n", rec.step, rec.loss.total, rec.loss.recon,
                  rec.loss.rq, rec.loss.con);
    out << buf;
  }
  if (!out) fail(ErrorKind::kIo, "failed writing loss history to " + path);
}

}  // namespace sidrec
