// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rgse/dep_graph.hpp"

namespace rgse {

/// Deterministic traversal of the dependency tree that defines the target order.
enum class TraversalRule {
  preorder,   ///< head, then each dependent subtree in linear order
  postorder,  ///< each dependent subtree in linear order, then the head
};

std::string_view to_string(TraversalRule rule);
TraversalRule parse_rule(std::string_view s);

struct SynthSpec {
  std::size_t vocab = 32;
  std::size_t min_len = 4;
  std::size_t max_len = 16;
  std::size_t train = 2000;
  std::size_t valid = 200;
  std::size_t test = 200;
  /// Probability that a token attaches to a head on its left when both sides
  /// offer candidates.
  double head_bias = 0.5;
  /// Largest |dependent - head| distance considered when attaching; 0 = unbounded.
  std::size_t max_arc = 2;
  /// Root at position 0 and tokens attach left to right, so every head
  /// precedes its dependents (head_bias is then irrelevant).
  bool root_first = true;
  TraversalRule rule = TraversalRule::preorder;
  std::uint64_t seed = 7;
};

struct SentencePair {
  DepGraph source;
  std::vector<std::string> target;
};

struct ParallelCorpus {
  std::vector<SentencePair> train;
  std::vector<SentencePair> valid;
  std::vector<SentencePair> test;
};

/// Source token k is "w<k>"; it translates to target token "v<k>".
std::string synth_source_token(std::size_t k);
std::string synth_target_token(std::string_view source_token);

/// Positions of a tree-shaped graph in traversal order, starting at the root.
/// Throws ArgumentError if the graph is not a tree.
std::vector<std::size_t> tree_traversal(const DepGraph& graph, TraversalRule rule);

/// Random dependency trees over nonsense tokens; each target is the
/// translated source read in `rule` order. Same spec, same corpus.
/// Throws ArgumentError for vocab < 8, min_len < 2, min_len > max_len or
/// an empty training split.
ParallelCorpus generate_task(const SynthSpec& spec);

}  // namespace rgse
