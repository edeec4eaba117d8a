// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/conllu.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "rgse/errors.hpp"

namespace rgse {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct PendingToken {
  std::string form;
  std::size_t head;
  std::string label;
  std::size_t line;
};

}  // namespace

std::vector<DepGraph> parse_conllu(std::string_view text) {
  std::vector<DepGraph> graphs;
  std::vector<PendingToken> tokens;
  std::string sent_id;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (tokens.empty()) {
      sent_id.clear();
      return;
    }
    std::vector<std::string> forms;
    std::vector<DepEdge> edges;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const PendingToken& tok = tokens[t];
      if (tok.head > tokens.size()) {
        throw ParseError("head " + std::to_string(tok.head) + " out of range for sentence of " +
                             std::to_string(tokens.size()) + " tokens",
                         tok.line);
      }
      if (tok.head == t + 1) throw ParseError("token is its own head", tok.line);
      forms.push_back(tok.form);
      if (tok.head > 0) edges.push_back({t, tok.head - 1, tok.label});
    }
    std::string id = sent_id.empty() ? std::to_string(graphs.size() + 1) : sent_id;
    graphs.emplace_back(std::move(forms), std::move(edges), std::move(id));
    tokens.clear();
    sent_id.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view key = "# sent_id = ";
      if (line.substr(0, key.size()) == key) sent_id = std::string(line.substr(key.size()));
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()), line_no);
    }
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) continue;
    const auto id = parse_index(cols[0]);
    if (!id || *id != tokens.size() + 1) {
      throw ParseError("token id '" + std::string(cols[0]) + "' out of sequence", line_no);
    }
    const auto head = parse_index(cols[6]);
    if (!head) throw ParseError("HEAD '" + std::string(cols[6]) + "' is not an index", line_no);
    tokens.push_back({std::string(cols[1]), *head, std::string(cols[7]), line_no});
  }
  flush();
  return graphs;
}

std::vector<DepGraph> read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open CoNLL-U file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conllu(buf.str());
}

std::string write_conllu(std::span<const DepGraph> graphs) {
  std::ostringstream out;
  for (const DepGraph& g : graphs) {
    if (!g.sentence_id().empty()) out << "# sent_id = " << g.sentence_id() << "\n";
    for (std::size_t t = 0; t < g.size(); ++t) {
      const auto head = g.head_of(t);
      std::string label = head ? g.label_of(t, *head).value_or("dep") : "root";
      if (label.empty()) label = "_";
      out << (t + 1) << '\t' << g.tokens()[t] << "\t_\t_\t_\t_\t" << (head ? *head + 1 : 0) << '\t' << label
          << "\t_\t_\n";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace rgse
