// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/dep_graph.hpp"

#include <algorithm>

#include "rgse/errors.hpp"

namespace rgse {

DepGraph::DepGraph(std::vector<std::string> tokens, std::vector<DepEdge> edges, std::string sentence_id)
    : tokens_(std::move(tokens)), sentence_id_(std::move(sentence_id)), neighbors_(tokens_.size()) {
  const std::size_t n = tokens_.size();
  for (const DepEdge& e : edges) {
    if (e.dependent >= n || e.head >= n) {
      throw ArgumentError("edge (" + std::to_string(e.dependent) + " -> " + std::to_string(e.head) +
                          ") outside sentence of length " + std::to_string(n));
    }
    if (e.dependent == e.head) throw ArgumentError("self pair at token " + std::to_string(e.dependent));
  }
  std::stable_sort(edges.begin(), edges.end(), [](const DepEdge& a, const DepEdge& b) {
    return a.dependent != b.dependent ? a.dependent < b.dependent : a.head < b.head;
  });
  for (DepEdge& e : edges) {
    if (!edges_.empty() && edges_.back().dependent == e.dependent && edges_.back().head == e.head) continue;
    neighbors_[e.dependent].push_back(e.head);
    neighbors_[e.head].push_back(e.dependent);
    edges_.push_back(std::move(e));
  }
  for (auto& list : neighbors_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::span<const std::size_t> DepGraph::neighbors(std::size_t j) const {
  if (j >= size()) throw ArgumentError("position " + std::to_string(j) + " outside graph of size " +
                                       std::to_string(size()));
  return neighbors_[j];
}

std::optional<std::size_t> DepGraph::head_of(std::size_t i) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), i,
                             [](const DepEdge& e, std::size_t dep) { return e.dependent < dep; });
  if (it == edges_.end() || it->dependent != i) return std::nullopt;
  return it->head;
}

std::optional<std::string> DepGraph::label_of(std::size_t dependent, std::size_t head) const {
  for (const DepEdge& e : edges_) {
    if (e.dependent == dependent && e.head == head) return e.label;
  }
  return std::nullopt;
}

bool DepGraph::is_tree() const {
  const std::size_t n = size();
  if (n == 0) return false;
  std::vector<int> heads_per_token(n, 0);
  for (const DepEdge& e : edges_) ++heads_per_token[e.dependent];
  std::size_t roots = 0;
  for (int h : heads_per_token) {
    if (h > 1) return false;
    if (h == 0) ++roots;
  }
  if (roots != 1) return false;
  // n - 1 edges and one root; acyclic iff every token reaches the root.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    for (std::size_t steps = 0;; ++steps) {
      auto h = head_of(cur);
      if (!h) break;
      if (steps > n) return false;
      cur = *h;
    }
  }
  return true;
}

std::vector<EdgeRef> incoming_edges(const DepGraph& graph, std::size_t position, Traversal traversal,
                                    EdgeFilter filter) {
  if (position >= graph.size()) {
    throw ArgumentError("incoming_edges: position " + std::to_string(position) + " outside graph of size " +
                        std::to_string(graph.size()));
  }
  const auto neighbors = graph.neighbors(position);
  std::vector<EdgeRef> out;
  out.reserve(neighbors.size() + 1);
  bool self_added = false;
  auto add_self = [&] {
    out.push_back({position, position, Temporal::self});
    self_added = true;
  };
  for (std::size_t source : neighbors) {
    if (!self_added && source > position) add_self();
    const bool earlier = source < position;
    const bool past = traversal == Traversal::forward ? earlier : !earlier;
    if (filter == EdgeFilter::past_only && !past) continue;
    if (filter == EdgeFilter::future_only && past) continue;
    out.push_back({source, position, past ? Temporal::past : Temporal::future});
  }
  if (!self_added) add_self();
  return out;
}

}  // namespace rgse
