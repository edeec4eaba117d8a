// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/synth_corpus.hpp"

#include <algorithm>
#include <functional>

#include "rgse/errors.hpp"
#include "rgse/rng.hpp"

namespace rgse {

std::string_view to_string(TraversalRule rule) { return rule == TraversalRule::preorder ? "preorder" : "postorder"; }

TraversalRule parse_rule(std::string_view s) {
  if (s == "preorder") return TraversalRule::preorder;
  if (s == "postorder") return TraversalRule::postorder;
  throw ArgumentError("unknown traversal rule '" + std::string(s) + "' (preorder, postorder)");
}

std::string synth_source_token(std::size_t k) { return "w" + std::to_string(k); }

std::string synth_target_token(std::string_view source_token) {
  if (source_token.empty() || source_token.front() != 'w') return std::string(source_token);
  return "v" + std::string(source_token.substr(1));
}

std::vector<std::size_t> tree_traversal(const DepGraph& graph, TraversalRule rule) {
  if (!graph.is_tree()) throw ArgumentError("tree_traversal: sentence '" + graph.sentence_id() + "' is not a tree");
  const std::size_t n = graph.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::size_t root = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto h = graph.head_of(i)) {
      children[*h].push_back(i);
    } else {
      root = i;
    }
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    if (rule == TraversalRule::preorder) order.push_back(u);
    for (std::size_t c : children[u]) visit(c);
    if (rule == TraversalRule::postorder) order.push_back(u);
  };
  visit(root);
  return order;
}

namespace {

DepGraph random_tree(Rng& rng, const SynthSpec& spec, std::size_t length, std::string id) {
  std::vector<std::string> tokens(length);
  for (auto& t : tokens) t = synth_source_token(rng.below(spec.vocab));

  // Grow the tree from a random root, attaching tokens in random order to an
  // already attached head within reach.
  std::vector<std::size_t> order(length);
  for (std::size_t i = 0; i < length; ++i) order[i] = i;
  if (!spec.root_first) rng.shuffle(order.begin(), order.end());
  std::vector<bool> attached(length, false);
  attached[order[0]] = true;
  std::vector<std::size_t> pending(order.begin() + 1, order.end());
  std::vector<DepEdge> edges;
  auto within_reach = [&](std::size_t a, std::size_t b) {
    const std::size_t d = a > b ? a - b : b - a;
    return spec.max_arc == 0 || d <= spec.max_arc;
  };
  while (!pending.empty()) {
    bool progressed = false;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const std::size_t i = pending[k];
      std::vector<std::size_t> left, right;
      for (std::size_t j = 0; j < length; ++j) {
        if (!attached[j] || !within_reach(i, j)) continue;
        (j < i ? left : right).push_back(j);
      }
      if (left.empty() && right.empty()) continue;
      const bool go_left = right.empty() || (!left.empty() && rng.bernoulli(spec.head_bias));
      const auto& pool = go_left ? left : right;
      const std::size_t head = pool[rng.below(pool.size())];
      edges.push_back({i, head, "dep"});
      attached[i] = true;
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
      progressed = true;
      break;
    }
    if (!progressed) throw ArgumentError("generate_task: max_arc too small to connect a sentence");
  }
  return DepGraph(std::move(tokens), std::move(edges), std::move(id));
}

std::vector<SentencePair> make_split(Rng& rng, const SynthSpec& spec, std::size_t count, const std::string& name) {
  std::vector<SentencePair> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t length = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
    DepGraph graph = random_tree(rng, spec, length, name + "-" + std::to_string(s + 1));
    std::vector<std::string> target;
    for (std::size_t p : tree_traversal(graph, spec.rule)) target.push_back(synth_target_token(graph.tokens()[p]));
    out.push_back({std::move(graph), std::move(target)});
  }
  return out;
}

}  // namespace

ParallelCorpus generate_task(const SynthSpec& spec) {
  if (spec.vocab < 8) throw ArgumentError("generate_task: vocab must be at least 8");
  if (spec.min_len < 2) throw ArgumentError("generate_task: sentences need at least 2 tokens");
  if (spec.min_len > spec.max_len) throw ArgumentError("generate_task: min_len exceeds max_len");
  if (spec.train == 0) throw ArgumentError("generate_task: empty training split");
  if (!(spec.head_bias >= 0.0 && spec.head_bias <= 1.0)) throw ArgumentError("generate_task: head_bias outside [0, 1]");
  Rng rng(spec.seed);
  ParallelCorpus corpus;
  corpus.train = make_split(rng, spec, spec.train, "train");
  corpus.valid = make_split(rng, spec, spec.valid, "valid");
  corpus.test = make_split(rng, spec, spec.test, "test");
  return corpus;
}

}  // namespace rgse
