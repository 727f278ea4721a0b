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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sidrec/cli/stages.hpp"
#include "sidrec/common/error.hpp"
#include "sidrec/datagen/files.hpp"
#include "sidrec/datagen/render.hpp"
#include "sidrec/lm/checkpoint.hpp"
#include "sidrec/quantizer/checkpoint.hpp"
#include "sidrec/sid/assign.hpp"

namespace sidrec {
namespace {

namespace fs = std::filesystem;

// Stream ids for mix_seed, one per consumer of randomness.
enum SeedStream : std::uint64_t {
  kWorldSeed = 1,
  kSessionSeed,
  kQuantizerInitSeed,
  kQuantizerTrainSeed,
  kMixtureSeed,
  kLmInitSeed,
  kCptTrainSeed,
  kGenericDataSeed,
  kGenericTrainSeed,
  kRewardSeed,
  kSftTrainSeed,
  kRecallSeed,
};

std::uint64_t stream(const RunConfig& c, SeedStream s) { return mix_seed(c.seed, s); }

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
}

void require_file(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) fail(ErrorKind::kData, "missing " + path + "; run " + producer + " first");
}

struct World {
  std::vector<Session> train;
  std::vector<Session> test;
  ItemCatalog catalog;
};

World load_world(const RunConfig& config, const RunPaths& run) {
  require_file(run.data("sessions.tsv"), "datagen");
  require_file(run.data("items.tsv"), "datagen");
  World w;
  auto [train, test] = split_sessions(read_sessions(run.data("sessions.tsv")), config.heldout_sessions);
  w.train = std::move(train);
  w.test = std::move(test);
  w.catalog = ItemCatalog(read_item_meta(run.data("items.tsv")));
  return w;
}

SidTable load_sids(const RunPaths& run) {
  require_file(run.data("sids.tsv"), "sid-assign");
  return read_sid_table(run.data("sids.tsv"));
}

Vocabulary make_vocab(const RunConfig& config) { return Vocabulary(vocab_spec_for(config.data, config.sid)); }

SidSpec effective_sid_spec(const RunConfig& config) {
  SidSpec spec = config.sid;
  if (!config.use_cooccurrence) spec.contrastive_weight = 0;
  return spec;
}

SequenceModel<float> load_model(const RunPaths& run, const std::string& leaf, const Vocabulary& vocab,
                                const std::string& producer) {
  require_file(run.checkpoint(leaf), producer);
  auto ck = load_lm(run.checkpoint(leaf));
  if (!(ck.vocab == vocab.spec())) {
    fail(ErrorKind::kConfig, run.checkpoint(leaf) + " was trained with a different vocabulary");
  }
  return std::move(ck.model);
}

std::vector<SftExample> held_out_queries(const RunConfig& config, const World& w, const SidTable& table,
                                         const Vocabulary& vocab, std::size_t limit) {
  auto queries = eval_queries(w.test, w.catalog, table, vocab, config.prompt);
  if (limit > 0 && queries.size() > limit) queries.resize(limit);
  if (queries.empty()) fail(ErrorKind::kData, "no held-out sessions to evaluate");
  return queries;
}

std::vector<std::vector<std::uint32_t>> prompts_of(const std::vector<SftExample>& queries) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& q : queries) out.push_back(q.prompt);
  return out;
}

std::vector<std::uint64_t> truth_of(const std::vector<SftExample>& queries) {
  std::vector<std::uint64_t> out;
  for (const auto& q : queries) out.push_back(q.item_id);
  return out;
}

LmTrainConfig with_seed(LmTrainConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

void pretrain_generic(const RunConfig& config, const RunPaths& run, SequenceModel<float>& model,
                      const Vocabulary& vocab) {
  CptData data;
  for (auto& seq : render_generic_text(vocab, config.generic_examples, 10, stream(config, kGenericDataSeed))) {
    data.train.push_back(wrap_sequence(seq, config.lm.max_len));
  }
  LmTrainConfig train = with_seed(config.generic, stream(config, kGenericTrainSeed));
  train.eval_every = std::max<std::size_t>(1, train.steps);
  const auto result = cpt_train(model, data, train);
  write_train_log(run.log("generic.tsv"), result.log);
  save_lm(run.checkpoint("generic.bin"), model, vocab.spec());
}

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

RunPaths::RunPaths(std::string r) : root(std::move(r)) {}

void RunPaths::create() const {
  for (const char* sub : {"data", "checkpoints", "logs", "decode"}) fs::create_directories(fs::path(root) / sub);
}

void stage_datagen(const RunConfig& config, const RunPaths& run) {
  const auto world = gen_corpus(config.data, stream(config, kWorldSeed));
  const auto sessions = gen_sessions(config.data, world, stream(config, kSessionSeed));
  write_embeddings(run.data("embeddings.bin"), world.corpus);
  write_sessions(run.data("sessions.tsv"), sessions);
  write_item_meta(run.data("items.tsv"), world.meta);
}

void stage_sid_train(const RunConfig& config, const RunPaths& run) {
  require_file(run.data("embeddings.bin"), "datagen");
  auto corpus = read_embeddings(run.data("embeddings.bin"));
  if (!config.multi_embedding) corpus = corpus.leading_modalities(1);
  const auto world = load_world(config, run);
  const auto pairs = to_row_pairs(cooccurrence_pairs(world.train, config.cooc_window), corpus);

  QuantizerDims dims = config.quantizer;
  dims.modality_dims = corpus.dims;
  RqVaeModel<float> model(dims, effective_sid_spec(config), stream(config, kQuantizerInitSeed));
  QuantizerTrainConfig train = config.sid_train;
  train.seed = stream(config, kQuantizerTrainSeed);
  const auto result = train_quantizer(model, corpus, pairs, train);
  save_quantizer(run.checkpoint("quantizer.bin"), model);
  write_loss_history(run.log("quantizer_loss.tsv"), result.history);
  write_lines(run.log("quantizer_warnings.txt"), result.warnings);
}

void stage_sid_assign(const RunConfig& config, const RunPaths& run) {
  require_file(run.checkpoint("quantizer.bin"), "sid-train");
  const auto model = load_quantizer(run.checkpoint("quantizer.bin"), effective_sid_spec(config));
  const auto path = config.embeddings_path.empty() ? run.data("embeddings.bin") : config.embeddings_path;
  require_file(path, "datagen");
  auto corpus = read_embeddings(path);
  if (!config.multi_embedding && corpus.modality_count() > model.modalities()) {
    corpus = corpus.leading_modalities(model.modalities());
  }
  write_sid_table(run.data("sids.tsv"), assign_sids(model, corpus));
}

void stage_lm_generic(const RunConfig& config, const RunPaths& run) {
  const auto vocab = make_vocab(config);
  SequenceModel<float> model(config.lm, vocab.size(), stream(config, kLmInitSeed));
  pretrain_generic(config, run, model, vocab);
}

void stage_lm_cpt(const RunConfig& config, const RunPaths& run) {
  const auto world = load_world(config, run);
  const auto table = load_sids(run);
  const auto vocab = make_vocab(config);

  std::vector<std::uint64_t> items;
  for (const auto& m : world.catalog.items()) items.push_back(m.item_id);
  std::sort(items.begin(), items.end());
  const auto held = static_cast<std::size_t>(static_cast<double>(items.size()) * config.heldout_items);
  const std::vector<std::uint64_t> train_items(items.begin(), items.end() - static_cast<std::ptrdiff_t>(held));

  MixtureOptions mix;
  mix.examples = config.cpt_examples;
  mix.max_history = config.cpt_max_history;
  mix.seed = stream(config, kMixtureSeed);
  const auto mixture = render_cpt_mixture(world.train, train_items, world.catalog, table, vocab, mix);
  write_token_corpus(run.data("cpt_corpus.txt"), mixture, vocab);

  CptData data;
  for (const auto& ex : mixture) data.train.push_back(wrap_sequence(ex.tokens, config.lm.max_len));
  for (const auto& s : world.test) {
    if (data.heldout_behavior.size() >= config.heldout_examples) break;
    const std::size_t end = s.events.size();
    const std::size_t begin = end - 1 > config.cpt_max_history ? end - 1 - config.cpt_max_history : 0;
    data.heldout_behavior.push_back(
        wrap_sequence(render_behavior(s, begin, end, world.catalog, table, vocab).tokens, config.lm.max_len));
  }
  for (std::size_t i = train_items.size(); i < items.size(); ++i) {
    if (data.heldout_metadata.size() >= config.heldout_examples) break;
    const auto& meta = world.catalog.at(items[i]);
    data.heldout_metadata.push_back(wrap_sequence(render_title(meta, table, vocab).tokens, config.lm.max_len));
    data.heldout_metadata.push_back(wrap_sequence(render_topics(meta, table, vocab).tokens, config.lm.max_len));
  }

  SequenceModel<float> model(config.lm, vocab.size(), stream(config, kLmInitSeed));
  if (config.sft_init == "generic_cpt") pretrain_generic(config, run, model, vocab);
  const auto result = cpt_train(model, data, with_seed(config.cpt, stream(config, kCptTrainSeed)));
  write_train_log(run.log("cpt.tsv"), result.log);
  save_lm(run.checkpoint("cpt.bin"), model, vocab.spec());
}

void stage_lm_sft(const RunConfig& config, const RunPaths& run) {
  const auto world = load_world(config, run);
  const auto table = load_sids(run);
  const auto vocab = make_vocab(config);

  SequenceModel<float> model;
  if (config.sft_init == "random") {
    model = SequenceModel<float>(config.lm, vocab.size(), stream(config, kLmInitSeed));
  } else if (config.sft_init == "generic") {
    model = load_model(run, "generic.bin", vocab, "lm-generic");
  } else {
    model = load_model(run, "cpt.bin", vocab, "lm-cpt");
  }
  if (!(model.dims == config.lm)) fail(ErrorKind::kConfig, "initial checkpoint architecture differs from [lm]");

  std::vector<std::string> warnings;
  auto examples = sft_candidates(world.train, world.catalog, table, vocab, config.prompt);
  if (config.reward_sampling) {
    Rng rng(stream(config, kRewardSeed));
    examples = sample_sft_examples(examples, rng, &warnings);
  }
  if (examples.empty()) fail(ErrorKind::kData, "no fine-tuning examples survived reward sampling");

  // Held-out recall along the way, to compare convergence speed.
  std::vector<std::string> curve;
  LmTrainResult result;
  const std::size_t k = std::min<std::size_t>(10, config.beam_width);
  if (config.sft_eval_queries > 0) {
    const auto queries = held_out_queries(config, world, table, vocab, config.sft_eval_queries);
    const auto prompts = prompts_of(queries);
    const auto truth = truth_of(queries);
    const DecodeOptions opts{config.beam_width, DecodeMode::kFree, nullptr};
    result = sft_train(model, examples, vocab, with_seed(config.sft, stream(config, kSftTrainSeed)),
                       [&](std::size_t step, const SequenceModel<float>& m) {
                         const auto results = beam_search_many(m, vocab, prompts, opts);
                         const double r = recall_at_k(results, truth, k, table, stream(config, kRecallSeed));
                         curve.push_back(std::to_string(step) + "\trecall@" + std::to_string(k) + "\t" +
                                         format_score(r));
                       });
  } else {
    result = sft_train(model, examples, vocab, with_seed(config.sft, stream(config, kSftTrainSeed)));
  }
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  write_train_log(run.log("sft.tsv"), result.log);
  write_lines(run.log("sft_recall.tsv"), curve);
  write_lines(run.log("sft_warnings.txt"), warnings);
  save_lm(run.checkpoint("sft.bin"), model, vocab.spec());
}

void stage_decode(const RunConfig& config, const RunPaths& run) {
  const auto world = load_world(config, run);
  const auto table = load_sids(run);
  const auto vocab = make_vocab(config);
  const auto model = load_model(run, "sft.bin", vocab, "lm-sft");
  const auto queries = held_out_queries(config, world, table, vocab, config.eval_queries);
  const auto trie = SidTrie::build(table);
  const DecodeOptions opts{config.beam_width, config.decode_mode, &trie};
  const auto results = beam_search_many(model, vocab, prompts_of(queries), opts);

  std::ofstream out(run.decode("predictions.tsv"));
  if (!out) fail(ErrorKind::kIo, "cannot write " + run.decode("predictions.tsv"));
  for (std::size_t q = 0; q < results.size(); ++q) {
    for (std::size_t r = 0; r < results[q].ranked.size(); ++r) {
      const auto& s = results[q].ranked[r];
      out << q << '\t' << queries[q].item_id << '\t' << r << '\t' << s.sid.to_string() << '\t'
          << format_score(s.score) << '\n';
    }
  }
}

MetricMap stage_eval(const RunConfig& config, const RunPaths& run) {
  const auto table = load_sids(run);
  const auto path = run.decode("predictions.tsv");
  require_file(path, "decode");
  std::vector<RetrievalResult> results;
  std::vector<std::uint64_t> truth;
  std::ifstream in(path);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    std::istringstream ss(line);
    std::size_t q = 0, rank = 0;
    std::uint64_t item = 0;
    std::string sid_text;
    double score = 0;
    if (!(ss >> q >> item >> rank >> sid_text >> score) || q > results.size() || (q == results.size()) == (rank != 0)) {
      fail(ErrorKind::kData, path + ":" + std::to_string(n) + ": malformed prediction");
    }
    if (q == results.size()) {
      results.emplace_back();
      truth.push_back(item);
    }
    results[q].ranked.push_back({SemanticId::parse(sid_text), score});
  }
  if (results.empty()) fail(ErrorKind::kData, path + " has no predictions");

  MetricMap metrics;
  for (auto k : config.recall_ks) {
    metrics["recall@" + std::to_string(k)] = recall_at_k(results, truth, k, table, stream(config, kRecallSeed));
  }
  metrics["hallucination_rate"] = hallucination_rate(results, table);
  metrics["sid_uniqueness"] = uniqueness(table);
  // Impressions: resolved items among each query's top cutoff.
  const std::size_t top = *std::max_element(config.recall_ks.begin(), config.recall_ks.end());
  std::map<std::uint64_t, double> impressions;
  for (std::size_t q = 0; q < results.size(); ++q) {
    Rng rng = Rng::derive(stream(config, kRecallSeed), q);
    for (auto item : resolved_top_k(results[q], std::min(top, results[q].ranked.size()), table, rng)) {
      impressions[item] += 1;
    }
  }
  std::vector<double> counts;
  for (const auto& [item, c] : impressions) counts.push_back(c);
  metrics["effective_vocab_size"] = counts.empty() ? 0.0 : static_cast<double>(effective_vocab_size(counts));
  metrics["eval_queries"] = static_cast<double>(results.size());
  write_metrics(run.metrics(), metrics);
  return metrics;
}

MetricMap run_pipeline(const RunConfig& config, const RunPaths& run) {
  stage_datagen(config, run);
  stage_sid_train(config, run);
  stage_sid_assign(config, run);
  if (config.sft_init == "cpt" || config.sft_init == "generic_cpt") stage_lm_cpt(config, run);
  if (config.sft_init == "generic") stage_lm_generic(config, run);
  stage_lm_sft(config, run);
  stage_decode(config, run);
  return stage_eval(config, run);
}

std::vector<GridCell> expand_grid(const std::string& grid) {
  std::vector<GridCell> cells{GridCell{}};
  std::stringstream axes(grid);
  std::string axis;
  while (std::getline(axes, axis, ';')) {
    if (axis.empty()) continue;
    const auto eq = axis.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == axis.size()) {
      fail(ErrorKind::kConfig, "ablate.grid: axis '" + axis + "' is not key=v1|v2");
    }
    const auto key = axis.substr(0, eq);
    std::vector<std::string> values;
    std::stringstream vs(axis.substr(eq + 1));
    for (std::string v; std::getline(vs, v, '|');) {
      if (v.empty()) fail(ErrorKind::kConfig, "ablate.grid: axis '" + axis + "' has an empty value");
      values.push_back(v);
    }
    std::vector<GridCell> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        GridCell c = cell;
        const auto short_key = key.substr(key.find('.') + 1);
        c.label += (c.label.empty() ? "" : ",") + short_key + "=" + v;
        c.overrides.emplace_back(key, v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  if (cells.size() == 1 && cells[0].overrides.empty()) cells[0].label = "base";
  return cells;
}

std::vector<ReportRow> run_ablate(const RunConfig& config, const RunPaths& run, std::ostream& out) {
  const auto cells = expand_grid(config.ablate_grid);
  // Validate every child config before running anything.
  std::vector<std::pair<RunConfig, RunEntry>> children;
  for (const auto& cell : cells) {
    for (auto seed : config.ablate_seeds) {
      RunConfig child = config;
      child.ablate_grid.clear();
      child.ablate_seeds = {seed};
      for (const auto& [k, v] : cell.overrides) set_config_value(child, k, v);
      child.seed = seed;
      child.validate();
      const auto dir = run.root + "/runs/" + cell.label + "_seed" + std::to_string(seed);
      children.push_back({child, RunEntry{cell.label, dir}});
    }
  }
  std::vector<RunEntry> entries;
  // A failed child leaves its .incomplete marker and counts as a missing run.
  for (const auto& [child, entry] : children) {
    std::ostringstream ignored;
    try {
      run_command("pipeline", child, RunPaths(entry.dir), ignored);
    } catch (const Error& e) {
      std::cerr << "warning: " << entry.dir << ": " << error_class(e.kind()) << ": " << e.what() << '\n';
    }
    entries.push_back(entry);
  }
  const auto rows = ablation_report(entries);
  const auto text = format_report(rows);
  std::ofstream(run.root + "/report.tsv") << text;
  out << text;
  return rows;
}

void run_command(const std::string& command, const RunConfig& config, const RunPaths& run, std::ostream& out) {
  config.validate();
  run.create();
  std::ofstream(run.resolved_config()) << format_config(config);
  std::ofstream(run.sentinel()) << command << '\n';
  if (command == "datagen") {
    stage_datagen(config, run);
  } else if (command == "sid-train") {
    stage_sid_train(config, run);
  } else if (command == "sid-assign") {
    stage_sid_assign(config, run);
  } else if (command == "lm-cpt") {
    stage_lm_cpt(config, run);
  } else if (command == "lm-generic") {
    stage_lm_generic(config, run);
  } else if (command == "lm-sft") {
    stage_lm_sft(config, run);
  } else if (command == "decode") {
    stage_decode(config, run);
  } else if (command == "eval") {
    for (const auto& [k, v] : stage_eval(config, run)) out << k << '=' << v << '\n';
  } else if (command == "pipeline") {
    for (const auto& [k, v] : run_pipeline(config, run)) out << k << '=' << v << '\n';
  } else if (command == "ablate") {
    run_ablate(config, run, out);
  } else {
    fail(ErrorKind::kConfig, "unknown command '" + command + "'");
  }
  fs::remove(run.sentinel());
}

}  // namespace sidrec
