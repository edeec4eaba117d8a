// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rgse/config.hpp"
#include "rgse/dataset.hpp"
#include "rgse/model.hpp"

namespace rgse {

struct EpochRecord {
  /// Epoch 0 is the untrained model.
  std::size_t epoch = 0;
  /// Mean per-token cross-entropy over the training split.
  double train_loss = 0.0;
  std::optional<double> valid_loss;
  std::size_t steps = 0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
  double seconds = 0.0;
  double steps_per_second() const { return seconds > 0.0 ? static_cast<double>(steps) / seconds : 0.0; }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean per-token teacher-forced cross-entropy (</s> included), no updates.
double corpus_loss(const Seq2SeqModel& model, const std::vector<Example>& examples);

/// Mini-batches of config.batch_size sentences grouped by source length, in
/// a seeded order; per-token mean loss per batch, gradient norm clipped to
/// config.clip_norm. Epoch 0 records the untrained loss; the validation loss
/// is recorded every config.eval_every epochs. Throws NumericError (with
/// epoch, batch and parameter norm) when a batch loss is not finite.
TrainResult train(Seq2SeqModel& model, const std::vector<Example>& train_set, const std::vector<Example>& valid_set,
                  const ExperimentConfig& config, const EpochCallback& on_epoch = {});

/// epoch,train_loss,valid_loss rows; an absent validation loss is left empty.
std::string loss_csv(const TrainResult& result);

}  // namespace rgse
