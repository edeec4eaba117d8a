// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgse/dep_graph.hpp"

namespace rgse {

/// Reads CoNLL-U text: 10 tab-separated columns per token line, blank lines
/// between sentences, '#' comments. HEAD h > 0 on token t yields edge
/// (t-1 -> h-1) labelled with DEPREL; HEAD 0 marks the root. Multiword ranges
/// ("3-4") and empty nodes ("3.1") are skipped. A "# sent_id = X" comment sets
/// the sentence id, otherwise sentences are numbered from 1.
///
/// Throws ParseError with the offending line number.
std::vector<DepGraph> parse_conllu(std::string_view text);
std::vector<DepGraph> read_conllu_file(const std::string& path);

/// Inverse of parse_conllu for word-level graphs (first head only).
std::string write_conllu(std::span<const DepGraph> graphs);

}  // namespace rgse
