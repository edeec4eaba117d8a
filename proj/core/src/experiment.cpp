// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rgse/errors.hpp"

namespace rgse {

RunResult run_experiment(const ExperimentConfig& config, const Dataset& data, const EpochCallback& on_epoch) {
  RunResult run;
  run.model = build_model(config, data.prep.source_vocab.size(), data.prep.target_vocab.size(), data.prep.labels);
  run.training = train(*run.model, data.train, data.valid, config, on_epoch);
  const auto& eval_set = data.test.empty() ? data.valid : data.test;
  if (!eval_set.empty()) run.eval = length_bucket_eval(*run.model, data.prep, eval_set, config.buckets);
  return run;
}

std::pair<double, double> mean_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

namespace {

void summarize(ArmSummary& arm) {
  std::vector<double> bleu, acc;
  for (const auto& t : arm.trials) {
    bleu.push_back(t.bleu);
    acc.push_back(t.accuracy);
  }
  std::tie(arm.mean_bleu, arm.sd_bleu) = mean_sd(bleu);
  std::tie(arm.mean_accuracy, arm.sd_accuracy) = mean_sd(acc);
}

}  // namespace

std::string AbReport::to_csv() const {
  std::string out = "arm,seed,bleu,accuracy,final_loss\n";
  char buf[160];
  for (const ArmSummary* arm : {&a, &b}) {
    for (const auto& t : arm->trials) {
      std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%.10f\n", arm->name.c_str(),
                    static_cast<unsigned long long>(t.seed), t.bleu, t.accuracy, t.final_loss);
      out += buf;
    }
  }
  return out;
}

std::string AbReport::summary() const {
  std::string out;
  char buf[200];
  for (const ArmSummary* arm : {&a, &b}) {
    std::snprintf(buf, sizeof buf, "%s: accuracy %.4f +- %.4f, bleu %.4f +- %.4f (%zu trials)\n", arm->name.c_str(),
                  arm->mean_accuracy, arm->sd_accuracy, arm->mean_bleu, arm->sd_bleu, arm->trials.size());
    out += buf;
  }
  return out;
}

AbReport ab_compare(const ExperimentConfig& a, const ExperimentConfig& b, std::size_t trials,
                    std::span<const std::string> intended_keys, const std::string& name_a, const std::string& name_b) {
  if (trials < 3) throw ArgumentError("ab_compare: at least 3 trials are needed, got " + std::to_string(trials));
  AbReport report;
  report.varied = a.to_config().diff_keys(b.to_config());
  std::string unintended;
  for (const auto& key : report.varied) {
    if (std::find(intended_keys.begin(), intended_keys.end(), key) == intended_keys.end()) {
      unintended += "\n  " + key;
    }
  }
  if (!unintended.empty()) throw ConfigError("arms differ in unintended fields:" + unintended);

  report.a.name = name_a;
  report.b.name = name_b;
  const ParallelCorpus corpus_a = load_corpus(a);
  const ParallelCorpus corpus_b = load_corpus(b);
  const Dataset data_a = build_dataset(corpus_a, a);
  const Dataset data_b = build_dataset(corpus_b, b);
  for (std::size_t k = 0; k < trials; ++k) {
    for (auto [config, data, arm] : {std::tuple{a, &data_a, &report.a}, std::tuple{b, &data_b, &report.b}}) {
      config.seed += k;
      RunResult run = run_experiment(config, *data);
      arm->trials.push_back({config.seed, run.eval.bleu, run.eval.token_accuracy,
                             run.training.epochs.empty() ? 0.0 : run.training.epochs.back().train_loss,
                             loss_csv(run.training)});
    }
  }
  summarize(report.a);
  summarize(report.b);
  return report;
}

}  // namespace rgse
