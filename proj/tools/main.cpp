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

#include <CLI11.hpp>
#include <iostream>

#include "sidrec/cli/stages.hpp"
#include "sidrec/common/error.hpp"

namespace {

constexpr const char* kCommands[][2] = {
    {"datagen", "generate the synthetic world"},
    {"sid-train", "train the residual quantizer"},
    {"sid-assign", "assign semantic IDs to every item"},
    {"lm-generic", "pre-train the sequence model on generic text"},
    {"lm-cpt", "continued pre-training on behavior and metadata"},
    {"lm-sft", "reward-sampled retrieval fine-tuning"},
    {"decode", "beam-search held-out queries"},
    {"eval", "compute metrics from decoded predictions"},
    {"pipeline", "run every stage in order"},
    {"ablate", "run the pipeline over a grid of overrides and seeds"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-ID generative retrieval pipeline"};
  app.require_subcommand(1);
  app.footer(sidrec::config_help());

  std::string config_path, run_dir = "run";
  std::vector<std::string> overrides;
  for (const auto& [name, help] : kCommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "INI config file");
    sub->add_option("-r,--run-dir", run_dir, "run directory")->capture_default_str();
    sub->add_option("-s,--set", overrides, "override, section.key=value (repeatable)");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    sidrec::RunConfig config;
    if (!config_path.empty()) sidrec::apply_config_file(config, config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) sidrec::fail(sidrec::ErrorKind::kConfig, "--set expects key=value, got '" + kv + "'");
      sidrec::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    sidrec::run_command(command, config, sidrec::RunPaths(run_dir), std::cout);
  } catch (const sidrec::Error& e) {
    std::cerr << "error[" << sidrec::error_class(e.kind()) << "]: " << e.what() << '\n';
    return sidrec::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error[io_error]: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
