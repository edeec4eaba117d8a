// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgse/dep_graph.hpp"

namespace rgse {

/// Subword pieces of a sentence and the token each piece came from.
/// Non-final pieces of a word carry the "@@" continuation marker.
struct SubwordMap {
  std::vector<std::string> pieces;
  std::vector<std::size_t> origin;
};

inline constexpr std::string_view kContinuationMarker = "@@";
inline constexpr std::string_view kEndOfWord = "</w>";

std::string strip_continuation(std::string_view piece);

/// Byte-pair merge table. Words are split into UTF-8 characters plus a
/// separate end-of-word symbol; each merge joins the most frequent adjacent
/// pair, ties broken by the lexicographically smallest pair.
class BpeModel {
 public:
  BpeModel() = default;
  explicit BpeModel(std::vector<std::pair<std::string, std::string>> merges);

  /// Learns up to `merges` merges from whitespace-tokenized lines. Throws
  /// ArgumentError on an empty corpus.
  static BpeModel learn(std::span<const std::string> corpus, std::size_t merges);
  /// Reads "left right" lines in priority order.
  static BpeModel load(std::istream& in);
  static BpeModel load_file(const std::string& path);
  void save(std::ostream& out) const;

  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

  std::vector<std::string> segment_word(std::string_view word) const;
  SubwordMap segment(std::span<const std::string> tokens) const;

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
};

/// Piece-level graph: every parse edge (i -> j) becomes an edge from each
/// piece of i to each piece of j, so substrings keep their word's relations.
/// Throws ArgumentError when some token has no piece.
DepGraph apply_subwords(const DepGraph& graph, const SubwordMap& map);

}  // namespace rgse
