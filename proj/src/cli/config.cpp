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

#include "sidrec/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const std::string& expected) {
  fail(ErrorKind::kConfig, key + ": expected " + expected + ", got '" + text + "'");
}

template <typename Num>
Num parse_number(const std::string& key, const std::string& text, const char* expected) {
  Num v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) bad_value(key, text, expected);
  return v;
}

void parse_into(const std::string& key, const std::string& t, std::size_t& out) {
  out = parse_number<std::size_t>(key, t, "a non-negative integer");
}
void parse_into(const std::string& key, const std::string& t, int& out) {
  out = parse_number<int>(key, t, "an integer");
}
void parse_into(const std::string& key, const std::string& t, double& out) {
  out = parse_number<double>(key, t, "a number");
}
void parse_into(const std::string&, const std::string& t, std::string& out) { out = t; }
void parse_into(const std::string& key, const std::string& t, bool& out) {
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    out = true;
  } else if (t == "false" || t == "0" || t == "no" || t == "off") {
    out = false;
  } else {
    bad_value(key, t, "true or false");
  }
}
void parse_into(const std::string& key, const std::string& t, std::vector<std::size_t>& out) {
  out.clear();
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_number<std::size_t>(key, part, "a comma-separated list"));
}
void parse_into(const std::string& key, const std::string& t, MaskMode& out) {
  try {
    out = parse_mask_mode(t);
  } catch (const Error&) {
    bad_value(key, t, "inclusive or paper_literal");
  }
}
void parse_into(const std::string& key, const std::string& t, CardinalitySchedule& out) {
  try {
    out = parse_schedule(t);
  } catch (const Error&) {
    bad_value(key, t, "multi_resolution or uniform");
  }
}
void parse_into(const std::string& key, const std::string& t, ContrastiveInput& out) {
  if (t == "quantized") {
    out = ContrastiveInput::kQuantized;
  } else if (t == "latent") {
    out = ContrastiveInput::kLatent;
  } else {
    bad_value(key, t, "quantized or latent");
  }
}
void parse_into(const std::string& key, const std::string& t, DecodeMode& out) {
  if (t == "free") {
    out = DecodeMode::kFree;
  } else if (t == "constrained") {
    out = DecodeMode::kConstrained;
  } else {
    bad_value(key, t, "free or constrained");
  }
}

std::string show(std::size_t v) { return std::to_string(v); }
std::string show(int v) { return std::to_string(v); }
std::string show(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string show(const std::string& v) { return v; }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}
std::string show(MaskMode v) { return to_string(v); }
std::string show(CardinalitySchedule v) { return to_string(v); }
std::string show(ContrastiveInput v) { return v == ContrastiveInput::kQuantized ? "quantized" : "latent"; }
std::string show(DecodeMode v) { return v == DecodeMode::kFree ? "free" : "constrained"; }

template <typename Access>
ConfigField field(std::string key, std::string help, Access access) {
  return ConfigField{key, std::move(help),
                     [key, access](RunConfig& c, const std::string& v) { parse_into(key, v, access(c)); },
                     [access](const RunConfig& c) { return show(access(const_cast<RunConfig&>(c))); }};
}

#define SIDREC_FIELD(key, member, help) field(key, help, [](RunConfig& c) -> auto& { return c.member; })

std::vector<ConfigField> build_fields() {
  return {
      SIDREC_FIELD("run.seed", seed, "master seed; every stage derives its own stream"),

      SIDREC_FIELD("data.items", data.items, "number of synthetic items"),
      SIDREC_FIELD("data.topics", data.topics, "number of latent topics"),
      SIDREC_FIELD("data.modality_dims", data.modality_dims, "embedding width per modality"),
      SIDREC_FIELD("data.noise", data.noise, "within-topic embedding noise scale"),
      SIDREC_FIELD("data.sessions", data.sessions, "number of user sessions"),
      SIDREC_FIELD("data.min_session", data.min_session, "shortest session"),
      SIDREC_FIELD("data.max_session", data.max_session, "longest session"),
      SIDREC_FIELD("data.stickiness", data.stickiness, "probability the next watch stays in topic"),
      SIDREC_FIELD("data.users", data.users, "number of users"),
      SIDREC_FIELD("data.channels", data.channels, "number of channels"),
      SIDREC_FIELD("data.title_words", data.title_words, "title word vocabulary"),
      SIDREC_FIELD("data.title_length", data.title_length, "words per title"),
      SIDREC_FIELD("data.second_topic_prob", data.second_topic_prob, "chance an item lists a second topic"),
      SIDREC_FIELD("data.mean_gap_hours", data.mean_gap_hours, "mean hours between watches"),
      SIDREC_FIELD("data.reward_scale", data.reward_scale, "reward per unit watch ratio"),
      SIDREC_FIELD("data.reward_noise", data.reward_noise, "reward noise scale"),
      SIDREC_FIELD("data.cooc_window", cooc_window, "co-occurrence window in events"),
      SIDREC_FIELD("data.heldout_sessions", heldout_sessions, "fraction of sessions held out for evaluation"),

      SIDREC_FIELD("sid.levels", sid.levels, "SID length"),
      SIDREC_FIELD("sid.base_cardinality", sid.base_cardinality, "first-level codebook size"),
      SIDREC_FIELD("sid.schedule", sid.schedule, "multi_resolution halves sizes per level; uniform spreads the same space evenly"),
      SIDREC_FIELD("sid.mask_mode", sid.mask_mode, "progressive mask: inclusive or paper_literal"),
      SIDREC_FIELD("sid.beta", sid.beta, "commitment weight"),
      SIDREC_FIELD("sid.use_cooccurrence", use_cooccurrence, "train with the co-occurrence contrastive loss"),
      SIDREC_FIELD("sid.contrastive_weight", sid.contrastive_weight, "contrastive loss weight when enabled"),
      SIDREC_FIELD("sid.contrastive_temperature", sid.contrastive_temperature, "contrastive softmax temperature"),
      SIDREC_FIELD("sid.contrastive_input", sid_train.contrastive_input, "contrastive input: quantized or latent"),
      SIDREC_FIELD("sid.multi_embedding", multi_embedding, "fuse every modality; false uses the first only"),
      SIDREC_FIELD("sid.hidden", quantizer.hidden, "encoder and decoder hidden width"),
      SIDREC_FIELD("sid.modality_latent", quantizer.modality_latent, "per-modality encoder output width"),
      SIDREC_FIELD("sid.latent", quantizer.latent, "fused latent and codeword width"),
      SIDREC_FIELD("sid.steps", sid_train.steps, "quantizer training steps"),
      SIDREC_FIELD("sid.batch_pairs", sid_train.batch_pairs, "co-occurring pairs per batch"),
      SIDREC_FIELD("sid.learning_rate", sid_train.learning_rate, "quantizer Adam learning rate"),
      SIDREC_FIELD("sid.reseed_every", sid_train.reseed_every, "steps between dead-code reseeding (0 disables)"),
      SIDREC_FIELD("sid.kmeans_init", sid_train.kmeans_init, "k-means++ codebook initialization"),

      SIDREC_FIELD("lm.layers", lm.layers, "transformer blocks"),
      SIDREC_FIELD("lm.dim", lm.dim, "model width"),
      SIDREC_FIELD("lm.heads", lm.heads, "attention heads"),
      SIDREC_FIELD("lm.ff", lm.ff, "feed-forward width"),
      SIDREC_FIELD("lm.max_len", lm.max_len, "longest sequence"),

      SIDREC_FIELD("cpt.steps", cpt.steps, "continued pre-training steps"),
      SIDREC_FIELD("cpt.batch_size", cpt.batch_size, "sequences per step"),
      SIDREC_FIELD("cpt.learning_rate", cpt.learning_rate, "constant Adam learning rate"),
      SIDREC_FIELD("cpt.eval_every", cpt.eval_every, "steps between held-out evaluations"),
      SIDREC_FIELD("cpt.examples", cpt_examples, "size of the 50/50 behavior and metadata mixture"),
      SIDREC_FIELD("cpt.max_history", cpt_max_history, "watches per behavior example"),
      SIDREC_FIELD("cpt.heldout_items", heldout_items, "fraction of items whose metadata is held out"),
      SIDREC_FIELD("cpt.heldout_examples", heldout_examples, "held-out sequences per slice"),

      SIDREC_FIELD("generic.steps", generic.steps, "generic text pre-training steps"),
      SIDREC_FIELD("generic.batch_size", generic.batch_size, "sequences per step"),
      SIDREC_FIELD("generic.learning_rate", generic.learning_rate, "constant Adam learning rate"),
      SIDREC_FIELD("generic.examples", generic_examples, "synthetic text sequences"),

      SIDREC_FIELD("sft.init", sft_init, "random, cpt, generic or generic_cpt; generic pre-trains on synthetic text, an analogue of a text-pretrained model"),
      SIDREC_FIELD("sft.steps", sft.steps, "fine-tuning steps"),
      SIDREC_FIELD("sft.batch_size", sft.batch_size, "examples per step"),
      SIDREC_FIELD("sft.learning_rate", sft.learning_rate, "constant Adam learning rate"),
      SIDREC_FIELD("sft.eval_every", sft.eval_every, "steps between held-out recall checks"),
      SIDREC_FIELD("sft.eval_queries", sft_eval_queries, "held-out queries per recall check (0 disables)"),
      SIDREC_FIELD("sft.max_history", prompt.max_history, "watches in the prompt history"),
      SIDREC_FIELD("sft.include_history", prompt.include_history, "include the watch history in prompts"),
      SIDREC_FIELD("sft.reward_sampling", reward_sampling, "keep examples with probability reward / max"),

      SIDREC_FIELD("decode.beam_width", beam_width, "beams kept per step"),
      SIDREC_FIELD("decode.mode", decode_mode, "free or constrained (trie) decoding"),
      SIDREC_FIELD("decode.eval_queries", eval_queries, "held-out queries to decode (0 means all)"),
      SIDREC_FIELD("eval.recall_ks", recall_ks, "cutoffs reported as recall@k"),

      SIDREC_FIELD("ablate.grid", ablate_grid, "axes as key=v1|v2 joined by ';'"),
      SIDREC_FIELD("ablate.seeds", ablate_seeds, "seeds run per grid cell"),

      SIDREC_FIELD("paths.embeddings", embeddings_path, "embeddings read by sid-assign (empty: the run's own)"),
  };
}

#undef SIDREC_FIELD

}  // namespace

RunConfig::RunConfig() {
  cpt.steps = 1000;
  cpt.batch_size = 32;
  cpt.learning_rate = 1e-3;
  cpt.eval_every = 100;
  generic.steps = 1000;
  generic.batch_size = 32;
  generic.learning_rate = 1e-3;
  generic.eval_every = 1000;
  sft.steps = 1000;
  sft.batch_size = 32;
  sft.learning_rate = 1e-3;
  sft.eval_every = 100;
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) fail(ErrorKind::kConfig, key + ": " + what);
  };
  data.validate();
  need(cooc_window >= 1, "data.cooc_window", "must be at least 1");
  need(heldout_sessions > 0 && heldout_sessions < 1, "data.heldout_sessions", "must be in (0, 1)");
  sid.validate();
  need(quantizer.hidden > 0 && quantizer.modality_latent > 0 && quantizer.latent > 0, "sid.latent",
       "quantizer widths must be positive");
  need(sid_train.batch_pairs >= 2, "sid.batch_pairs", "must be at least 2");
  need(sid_train.learning_rate >= 0, "sid.learning_rate", "must be non-negative");
  lm.validate();
  for (const auto* t : {&cpt, &generic, &sft}) {
    need(t->batch_size > 0, "batch_size", "must be positive");
    need(t->eval_every > 0, "eval_every", "must be positive");
    need(t->learning_rate >= 0, "learning_rate", "must be non-negative");
  }
  need(lm.max_len >= 16, "lm.max_len", "must be at least 16");
  need(cpt_examples > 0, "cpt.examples", "must be positive");
  need(heldout_items > 0 && heldout_items < 1, "cpt.heldout_items", "must be in (0, 1)");
  need(sft_init == "random" || sft_init == "cpt" || sft_init == "generic" || sft_init == "generic_cpt", "sft.init",
       "must be random, cpt, generic or generic_cpt");
  need(beam_width >= 1, "decode.beam_width", "must be at least 1");
  need(!recall_ks.empty(), "eval.recall_ks", "needs at least one cutoff");
  for (auto k : recall_ks) {
    need(k >= 1 && k <= beam_width, "eval.recall_ks",
         "cutoff " + std::to_string(k) + " must be in [1, decode.beam_width = " + std::to_string(beam_width) + "]");
  }
  need(!ablate_seeds.empty(), "ablate.seeds", "needs at least one seed");
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = build_fields();
  return fields;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : config_fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorKind::kConfig, path + ": key '" + section + "' is outside any section");
    for (const auto& [name, value] : body) set_config_value(config, section + "." + name, value.data());
  }
}

std::string format_config(const RunConfig& config) {
  std::string out, section;
  for (const auto& f : config_fields()) {
    const auto dot = f.key.find('.');
    const auto sec = f.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(config) + '\n';
  }
  return out;
}

std::string config_help() {
  const RunConfig defaults;
  std::string out = "Config keys (set in the file or with --set section.key=value):\n";
  for (const auto& f : config_fields()) {
    std::string line = "  " + f.key + " = " + f.get(defaults);
    if (line.size() < 44) line.resize(44, ' ');
    out += line + "  " + f.help + '\n';
  }
  return out;
}

}  // namespace sidrec
