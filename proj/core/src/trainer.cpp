// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rgse/errors.hpp"
#include "rgse/optimizer.hpp"
#include "rgse/rng.hpp"

namespace rgse {

namespace {

std::size_t token_count(const Example& ex) { return ex.target.size() + 1; }

std::vector<std::vector<std::size_t>> make_batches(const std::vector<Example>& data, std::size_t batch_size,
                                                   Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].source.size() < data[b].source.size(); });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  }
  rng.shuffle(batches.begin(), batches.end());
  return batches;
}

std::string format_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

}  // namespace

double corpus_loss(const Seq2SeqModel& model, const std::vector<Example>& examples) {
  if (examples.empty()) throw ArgumentError("corpus_loss: no examples");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const Example& ex : examples) {
    ad::Tape tape;
    total += model.loss(tape, ex.graph, ex.source, ex.target).item();
    tokens += token_count(ex);
  }
  return total / static_cast<double>(tokens);
}

TrainResult train(Seq2SeqModel& model, const std::vector<Example>& train_set, const std::vector<Example>& valid_set,
                  const ExperimentConfig& config, const EpochCallback& on_epoch) {
  using Clock = std::chrono::steady_clock;
  if (train_set.empty()) throw ArgumentError("train: empty training set");
  ParamStore& store = model.params();
  store.zero_grad();
  Optimizer optimizer(config.optimizer);
  Rng batch_rng(derive_seed(config.seed, "batches"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  TrainResult result;

  auto record = [&](EpochRecord rec) {
    const bool validate = !valid_set.empty() &&
                          (rec.epoch == 0 || (config.eval_every > 0 && rec.epoch % config.eval_every == 0) ||
                           rec.epoch == config.epochs);
    if (validate) rec.valid_loss = corpus_loss(model, valid_set);
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  };

  EpochRecord initial;
  initial.train_loss = corpus_loss(model, train_set);
  record(initial);

  const auto start = Clock::now();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    const auto batches = make_batches(train_set, config.batch_size, batch_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::size_t tokens = 0;
      for (std::size_t i : batches[b]) tokens += token_count(train_set[i]);
      double batch_loss = 0.0;
      for (std::size_t i : batches[b]) {
        const Example& ex = train_set[i];
        ad::Tape tape;
        const ad::Var loss = model.loss(tape, ex.graph, ex.source, ex.target, true, &dropout_rng);
        batch_loss += loss.item();
        tape.backward(ad::scale(loss, 1.0 / static_cast<double>(tokens)));
      }
      const double norm = store.grad_norm();
      if (!std::isfinite(batch_loss) || !std::isfinite(norm)) {
        double param_norm = 0.0;
        for (const auto& [name, t] : store.entries())
          for (double v : t.data()) param_norm += v * v;
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b + 1) +
                           " (batch loss " + std::to_string(batch_loss) + ", gradient norm " + std::to_string(norm) +
                           ", parameter norm " + std::to_string(std::sqrt(param_norm)) + ")");
      }
      clip_grad_norm(store, config.clip_norm);
      optimizer.step(store);
      ++result.steps;
      epoch_loss += batch_loss;
      epoch_tokens += tokens;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(epoch_tokens);
    rec.steps = result.steps;
    rec.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    record(rec);
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

std::string loss_csv(const TrainResult& result) {
  std::string out = "epoch,train_loss,valid_loss\n";
  for (const auto& e : result.epochs) {
    out += std::to_string(e.epoch) + "," + format_loss(e.train_loss) + "," +
           (e.valid_loss ? format_loss(*e.valid_loss) : "") + "\n";
  }
  return out;
}

}  // namespace rgse
