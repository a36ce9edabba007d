// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Command line front end: ebm-sphere <subcommand> --config <path> [options].

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ebm/errors.h"
#include "ebm/harness.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Options& opts, bool with_jobs) {
  cmd->add_option("--config", opts.config, "JSON experiment config")->required();
  cmd->add_option("--out", opts.out, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", opts.seed, "Overrides base_seed");
  if (with_jobs) cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void print_paths(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based models on the hypersphere"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* teacher_gen = app.add_subcommand("teacher-gen", "Write the teacher to <out>/teacher.json");
  CLI::App* sample = app.add_subcommand("sample", "Draw train/valid/test splits from the teacher");
  CLI::App* train = app.add_subcommand("train", "Train one model on <out>/data/train.csv");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate <out>/model.json");
  CLI::App* sweep = app.add_subcommand("sweep", "Run the full grid and write results.csv");
  CLI::App* plot = app.add_subcommand("plot", "Aggregate results.csv and draw SVG panels");
  for (CLI::App* cmd : {teacher_gen, sample, train, evaluate, plot}) add_common(cmd, opts, false);
  add_common(sweep, opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    ebm::ExperimentConfig cfg = ebm::ExperimentConfig::load(opts.config);
    if (opts.seed) cfg.base_seed = *opts.seed;
    const std::filesystem::path out = opts.out.empty() ? std::filesystem::path(cfg.output_dir)
                                                       : std::filesystem::path(opts.out);
    if (teacher_gen->parsed()) {
      print_paths({ebm::cmd_teacher_gen(cfg, out)});
    } else if (sample->parsed()) {
      print_paths(ebm::cmd_sample(cfg, out));
    } else if (train->parsed()) {
      print_paths(ebm::cmd_train(cfg, out));
    } else if (evaluate->parsed()) {
      print_paths({ebm::cmd_evaluate(cfg, out)});
    } else if (sweep->parsed()) {
      print_paths({ebm::cmd_sweep(cfg, out, opts.jobs)});
    } else if (plot->parsed()) {
      print_paths(ebm::cmd_plot(out));
    }
  } catch (const ebm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
