// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rgse_tools/commands.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("rgse"));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  CLI::App app{"Graph-recurrent syntax encoders for translation"};
  app.require_subcommand(1);

  std::string config, grid, out, suite, ckpt, input;
  std::size_t jobs = 1;

  auto* train = app.add_subcommand("train", "Train and evaluate one configuration");
  train->add_option("--config", config, "Experiment config file")->required();
  train->add_option("--out", out, "Output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "Train every cell of an ablation grid");
  ablate->add_option("--grid", grid, "Grid file")->required();
  ablate->add_option("--out", out, "Output directory")->required();
  ablate->add_option("--jobs", jobs, "Cells trained in parallel")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run gradient, oracle or invariant checks");
  verify->add_option("--suite", suite, "grad, oracle, invariant or all")->required();

  auto* translate = app.add_subcommand("translate", "Greedy-decode a CoNLL-U file with a checkpoint");
  translate->add_option("--ckpt", ckpt, "Checkpoint written by train")->required();
  translate->add_option("--in", input, "CoNLL-U input")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rgse::tools::kExitConfigError;
  }

  if (*train) return rgse::tools::cmd_train(config, out);
  if (*ablate) return rgse::tools::cmd_ablate(grid, out, jobs);
  if (*verify) return rgse::tools::cmd_verify(suite, std::cout);
  return rgse::tools::cmd_translate(ckpt, input, std::cout);
}
