// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rgse {

/// Parse edge w_dependent -> w_head.
struct DepEdge {
  std::size_t dependent = 0;
  std::size_t head = 0;
  std::string label;

  friend bool operator==(const DepEdge&, const DepEdge&) = default;
};

enum class Temporal { past, future, self };
enum class Traversal { forward, backward };
enum class EdgeFilter { total, past_only, future_only };

/// Edge from encoder state at `source` into graph-recurrent node `target`.
struct EdgeRef {
  std::size_t source = 0;
  std::size_t target = 0;
  Temporal temporal = Temporal::self;

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

/// Tokens plus directed dependency edges. Immutable after construction.
///
/// Word-level graphs coming from a parser satisfy the tree property; graphs
/// produced by subword replication may give a piece several heads.
class DepGraph {
 public:
  DepGraph() = default;
  /// Throws ArgumentError on out-of-range indices or self pairs. Duplicate
  /// (dependent, head) pairs keep the first label.
  DepGraph(std::vector<std::string> tokens, std::vector<DepEdge> edges, std::string sentence_id = {});

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  /// Sorted by (dependent, head).
  const std::vector<DepEdge>& edges() const { return edges_; }
  const std::string& sentence_id() const { return sentence_id_; }

  /// Non-self tokens related to j in either direction, ascending.
  std::span<const std::size_t> neighbors(std::size_t j) const;
  /// First head of i, if any.
  std::optional<std::size_t> head_of(std::size_t i) const;
  std::optional<std::string> label_of(std::size_t dependent, std::size_t head) const;
  /// Every token has at most one head, exactly one token has none, no cycles.
  bool is_tree() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<DepEdge> edges_;
  std::string sentence_id_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// E_in(s_j): the self edge, every dependent of j and every head of j, tagged
/// past/future relative to the traversal direction and then filtered. The
/// self edge survives every filter. Result is ordered by source position.
std::vector<EdgeRef> incoming_edges(const DepGraph& graph, std::size_t position, Traversal traversal,
                                    EdgeFilter filter);

}  // namespace rgse
