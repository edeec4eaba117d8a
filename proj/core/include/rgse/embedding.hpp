// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rgse/autodiff.hpp"
#include "rgse/gru.hpp"
#include "rgse/param_store.hpp"

namespace rgse {

/// Token <-> id map. Ids 0..3 are reserved for pad, bos, eos and unk.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocab();
  /// Adds every distinct token, in first-seen order.
  static Vocab build(std::span<const std::vector<std::string>> sentences);
  static Vocab from_tokens(std::span<const std::string> tokens_in_id_order);

  int add(const std::string& token);
  /// Unknown tokens map to kUnk.
  int id(const std::string& token) const;
  /// Out-of-range ids render as the unk token.
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Rows of E_src (or E_tgt), one per vocabulary id.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(ParamStore& store, const std::string& name, std::size_t vocab_size, std::size_t dim);

  /// Ids outside the table resolve to Vocab::kUnk.
  ad::Var lookup(ad::Tape& tape, int id) const;
  std::vector<ad::Var> lookup(ad::Tape& tape, std::span<const int> ids) const;

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_size_; }
  Tensor* table = nullptr;

 private:
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
};

/// h~_t = concat(forward_t, backward_t) of a BiGRU over the embedded ids.
std::vector<ad::Var> bigru_encode(ad::Tape& tape, std::span<const int> ids, const EmbeddingTable& embeddings,
                                  const BiGru& encoder);

}  // namespace rgse
