// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/embedding.hpp"

#include "rgse/errors.hpp"

namespace rgse {

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<s>", "</s>", "<unk>"}) add(t);
}

Vocab Vocab::build(std::span<const std::vector<std::string>> sentences) {
  Vocab v;
  for (const auto& s : sentences)
    for (const auto& t : s) v.add(t);
  return v;
}

Vocab Vocab::from_tokens(std::span<const std::string> tokens_in_id_order) {
  Vocab v;
  if (tokens_in_id_order.size() < 4) throw ArgumentError("vocabulary lacks the reserved tokens");
  for (std::size_t i = 4; i < tokens_in_id_order.size(); ++i) {
    if (v.add(tokens_in_id_order[i]) != static_cast<int>(i)) {
      throw ArgumentError("duplicate vocabulary token '" + tokens_in_id_order[i] + "'");
    }
  }
  return v;
}

int Vocab::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) return tokens_[kUnk];
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

EmbeddingTable::EmbeddingTable(ParamStore& store, const std::string& name, std::size_t vocab_size, std::size_t dim)
    : vocab_size_(vocab_size), dim_(dim) {
  if (vocab_size <= static_cast<std::size_t>(Vocab::kUnk)) throw ArgumentError("embedding table smaller than the reserved ids");
  table = &store.add(name, {vocab_size, dim}, Init::uniform_fan_in);
}

ad::Var EmbeddingTable::lookup(ad::Tape& tape, int id) const {
  const std::size_t r =
      (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) ? static_cast<std::size_t>(Vocab::kUnk) : static_cast<std::size_t>(id);
  return ad::row(tape.param(*table), r);
}

std::vector<ad::Var> EmbeddingTable::lookup(ad::Tape& tape, std::span<const int> ids) const {
  std::vector<ad::Var> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(lookup(tape, id));
  return out;
}

std::vector<ad::Var> bigru_encode(ad::Tape& tape, std::span<const int> ids, const EmbeddingTable& embeddings,
                                  const BiGru& encoder) {
  if (ids.empty()) throw ArgumentError("bigru_encode: empty sequence");
  const auto inputs = embeddings.lookup(tape, ids);
  return encoder.encode(tape, inputs);
}

}  // namespace rgse
