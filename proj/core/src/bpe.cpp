// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/bpe.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rgse/errors.hpp"

namespace rgse {

namespace {

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    len = std::min(len, word.size() - i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> initial_symbols(std::string_view word) {
  auto symbols = utf8_chars(word);
  symbols.emplace_back(kEndOfWord);
  return symbols;
}

void merge_pair(std::vector<std::string>& symbols, const std::string& left, const std::string& right) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

}  // namespace

std::string strip_continuation(std::string_view piece) {
  if (piece.size() >= kContinuationMarker.size() &&
      piece.substr(piece.size() - kContinuationMarker.size()) == kContinuationMarker) {
    piece.remove_suffix(kContinuationMarker.size());
  }
  return std::string(piece);
}

BpeModel::BpeModel(std::vector<std::pair<std::string, std::string>> merges) : merges_(std::move(merges)) {
  for (std::size_t r = 0; r < merges_.size(); ++r) ranks_.emplace(merges_[r], r);
}

BpeModel BpeModel::learn(std::span<const std::string> corpus, std::size_t merges) {
  std::map<std::string, std::size_t> word_counts;
  for (const std::string& line : corpus) {
    std::istringstream words(line);
    std::string w;
    while (words >> w) ++word_counts[w];
  }
  if (word_counts.empty()) throw ArgumentError("learn_bpe: empty corpus");

  std::vector<std::pair<std::vector<std::string>, std::size_t>> vocab;
  for (const auto& [w, c] : word_counts) vocab.emplace_back(initial_symbols(w), c);

  std::vector<std::pair<std::string, std::string>> table;
  for (std::size_t m = 0; m < merges; ++m) {
    std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
    for (const auto& [symbols, count] : vocab) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) pair_counts[{symbols[i], symbols[i + 1]}] += count;
    }
    if (pair_counts.empty()) break;
    // std::map iterates pairs in lexicographic order, so the first maximum wins ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    table.push_back(best->first);
    for (auto& [symbols, _] : vocab) merge_pair(symbols, best->first.first, best->first.second);
  }
  return BpeModel(std::move(table));
}

BpeModel BpeModel::load(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream parts(line);
    std::string left, right, extra;
    if (!(parts >> left >> right) || (parts >> extra)) {
      throw ParseError("merge line must be 'left right'", line_no);
    }
    merges.emplace_back(std::move(left), std::move(right));
  }
  return BpeModel(std::move(merges));
}

BpeModel BpeModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open merge table '" + path + "'");
  return load(in);
}

void BpeModel::save(std::ostream& out) const {
  for (const auto& [left, right] : merges_) out << left << ' ' << right << '\n';
}

std::vector<std::string> BpeModel::segment_word(std::string_view word) const {
  if (word.empty()) throw ArgumentError("segment_word: empty word");
  auto symbols = initial_symbols(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    merge_pair(symbols, merges_[best_rank].first, merges_[best_rank].second);
  }
  std::string& last = symbols.back();
  if (last == kEndOfWord) {
    symbols.pop_back();
  } else {
    last.resize(last.size() - kEndOfWord.size());
  }
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) symbols[i] += kContinuationMarker;
  return symbols;
}

SubwordMap BpeModel::segment(std::span<const std::string> tokens) const {
  SubwordMap map;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (std::string& piece : segment_word(tokens[t])) {
      map.pieces.push_back(std::move(piece));
      map.origin.push_back(t);
    }
  }
  return map;
}

DepGraph apply_subwords(const DepGraph& graph, const SubwordMap& map) {
  if (map.pieces.size() != map.origin.size()) {
    throw ArgumentError("subword map has " + std::to_string(map.pieces.size()) + " pieces but " +
                        std::to_string(map.origin.size()) + " origins");
  }
  std::vector<std::vector<std::size_t>> pieces_of(graph.size());
  for (std::size_t p = 0; p < map.origin.size(); ++p) {
    if (map.origin[p] >= graph.size()) {
      throw ArgumentError("piece " + std::to_string(p) + " maps to missing token " + std::to_string(map.origin[p]));
    }
    pieces_of[map.origin[p]].push_back(p);
  }
  for (std::size_t t = 0; t < graph.size(); ++t) {
    if (pieces_of[t].empty()) throw ArgumentError("token " + std::to_string(t) + " ('" + graph.tokens()[t] +
                                                  "') is not covered by the subword map");
  }
  std::vector<DepEdge> edges;
  for (const DepEdge& e : graph.edges()) {
    for (std::size_t pd : pieces_of[e.dependent])
      for (std::size_t ph : pieces_of[e.head]) edges.push_back({pd, ph, e.label});
  }
  return DepGraph(map.pieces, std::move(edges), graph.sentence_id());
}

}  // namespace rgse
