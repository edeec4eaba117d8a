// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rgse/bpe.hpp"
#include "rgse/config.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/embedding.hpp"
#include "rgse/synth_corpus.hpp"

namespace rgse {

/// One sentence pair ready for a model: the (possibly subword-split) source
/// graph with aligned ids, target ids, and the word-level reference.
struct Example {
  DepGraph graph;
  std::vector<int> source;
  std::vector<int> target;
  std::vector<std::string> reference;
};

/// Everything needed to map raw text to model ids and back.
struct Preprocessor {
  Vocab source_vocab;
  Vocab target_vocab;
  /// No merges means word-level tokens.
  BpeModel bpe;
  /// Dependency labels seen in training, sorted.
  std::vector<std::string> labels;

  /// Subword-splits the graph (edges replicated across pieces) and maps ids.
  Example source_example(const DepGraph& graph) const;
  Example make_example(const DepGraph& graph, const std::vector<std::string>& target) const;
  /// Target ids back to words, re-joining "@@" continuations.
  std::vector<std::string> target_words(std::span<const int> ids) const;
};

struct Dataset {
  Preprocessor prep;
  std::vector<Example> train;
  std::vector<Example> valid;
  std::vector<Example> test;
};

/// One whitespace-tokenized sentence per line.
std::vector<std::vector<std::string>> read_token_lines(const std::string& path);

/// Pieces with "@@" continuation markers merged back into words.
std::vector<std::string> join_subwords(std::span<const std::string> pieces);

/// Builds vocabularies (and BPE, when configured) from the training split.
/// Training pairs longer than max_train_len on either side are dropped.
/// Throws ConfigError when source and target files disagree in length.
Dataset build_dataset(const ParallelCorpus& corpus, const ExperimentConfig& config);

/// Synthetic task or CoNLL-U + text files, as the config says.
ParallelCorpus load_corpus(const ExperimentConfig& config);

}  // namespace rgse
