// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgse/dataset.hpp"
#include "rgse/model.hpp"

namespace rgse {

using TokenSeq = std::vector<std::string>;

struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  /// Clipped n-gram precision, n = 1..4 (index n - 1); 0 when no n-grams exist.
  double precision(std::size_t n) const;
  /// exp(1 - r / c) when c < r, else 1; 0 for an empty candidate side.
  double brevity_penalty() const;
  /// Geometric mean of the four precisions times the brevity penalty, unsmoothed.
  double bleu() const;
};

/// Corpus-level counts. Throws ArgumentError for an empty candidate list or
/// mismatched list lengths.
BleuStats bleu4_stats(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);
double bleu4(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

/// Add-one smoothed sentence BLEU, for debugging output only.
double smoothed_sentence_bleu(const TokenSeq& candidate, const TokenSeq& reference);

struct BucketScore {
  /// Sentences with lower < source length <= upper; upper = 0 means unbounded.
  std::size_t lower = 0;
  std::size_t upper = 0;
  std::size_t count = 0;
  std::optional<double> bleu;

  std::string label() const;
};

/// Buckets (0, b1], (b1, b2], ..., (bk, inf). Throws ArgumentError unless the
/// boundaries are strictly increasing and positive.
std::vector<BucketScore> bucket_scores(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references,
                                       std::span<const std::size_t> source_lengths,
                                       std::span<const std::size_t> boundaries);

/// Fraction of reference positions whose token the candidate reproduces at
/// the same position.
double token_accuracy(std::span<const std::vector<int>> candidates, std::span<const std::vector<int>> references);

struct EvalReport {
  double bleu = 0.0;
  std::vector<BucketScore> buckets;
  double token_accuracy = 0.0;
  double loss = 0.0;
  std::size_t sentences = 0;
  std::string fingerprint;

  /// bucket,lower,upper,count,bleu rows plus a final "corpus" row.
  std::string to_csv() const;
  /// Line chart of BLEU per bucket; empty buckets leave gaps.
  std::string to_svg() const;
};

struct Translation {
  std::vector<int> ids;
  TokenSeq words;
};

std::vector<Translation> translate_all(const Seq2SeqModel& model, const Preprocessor& prep,
                                       std::span<const Example> examples);

/// Greedy-decodes every example and scores it by source length bucket.
EvalReport length_bucket_eval(const Seq2SeqModel& model, const Preprocessor& prep, const std::vector<Example>& examples,
                              std::span<const std::size_t> boundaries);

}  // namespace rgse
