// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "rgse/dataset.hpp"
#include "rgse/model.hpp"

namespace rgse {

struct Checkpoint {
  ExperimentConfig config;
  Preprocessor prep;
  std::unique_ptr<Seq2SeqModel> model;
};

/// Resolved config, vocabularies, BPE merges, labels and every parameter tensor.
void save_checkpoint(const std::string& path, const Seq2SeqModel& model, const Preprocessor& prep);

/// Rebuilds the model from the stored config and loads its tensors. Throws
/// ConfigError listing missing, unexpected or differently shaped tensors.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rgse
