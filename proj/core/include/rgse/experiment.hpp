// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgse/config.hpp"
#include "rgse/dataset.hpp"
#include "rgse/evaluation.hpp"
#include "rgse/model.hpp"
#include "rgse/trainer.hpp"

namespace rgse {

struct RunResult {
  TrainResult training;
  /// Scored on the test split, or the validation split when there is no test split.
  EvalReport eval;
  std::unique_ptr<Seq2SeqModel> model;
};

/// Builds the model for `config`, trains it on `data` and evaluates it.
RunResult run_experiment(const ExperimentConfig& config, const Dataset& data, const EpochCallback& on_epoch = {});

struct ArmTrial {
  std::uint64_t seed = 0;
  double bleu = 0.0;
  double accuracy = 0.0;
  double final_loss = 0.0;
  /// loss_csv() of the trial's training run.
  std::string loss_csv;
};

struct ArmSummary {
  std::string name;
  std::vector<ArmTrial> trials;
  double mean_bleu = 0.0;
  double sd_bleu = 0.0;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
};

struct AbReport {
  ArmSummary a;
  ArmSummary b;
  /// Config keys on which the arms differ.
  std::vector<std::string> varied;

  /// arm,seed,bleu,accuracy,final_loss; one row per arm and trial.
  std::string to_csv() const;
  /// "name: accuracy mean +- sd, bleu mean +- sd" per arm.
  std::string summary() const;
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
std::pair<double, double> mean_sd(std::span<const double> values);

/// Trains both arms over seeds a.seed, a.seed + 1, ... and scores each run.
/// The arms may differ only in `intended_keys` (config keys such as
/// "rgse.variant"); any other difference raises ConfigError listing it.
/// Throws ArgumentError when trials < 3.
AbReport ab_compare(const ExperimentConfig& a, const ExperimentConfig& b, std::size_t trials,
                    std::span<const std::string> intended_keys, const std::string& name_a = "A",
                    const std::string& name_b = "B");

}  // namespace rgse
