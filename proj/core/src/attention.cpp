// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/attention.hpp"

#include <cmath>

#include "rgse/errors.hpp"

namespace rgse {

std::vector<double> positional_encoding(std::size_t position, std::size_t dim) {
  if (dim % 2 != 0) throw ArgumentError("positional encoding width must be even, got " + std::to_string(dim));
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    const double angle =
        static_cast<double>(position) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim));
    out[i] = std::sin(angle);
    out[i + 1] = std::cos(angle);
  }
  return out;
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& prefix, std::size_t model_dim,
                                       std::size_t heads)
    : model_dim_(model_dim) {
  if (heads == 0 || model_dim % heads != 0) {
    throw DimensionError("model width " + std::to_string(model_dim) + " not divisible by " + std::to_string(heads) +
                         " heads");
  }
  const std::size_t head_dim = model_dim / heads;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string p = prefix + ".head" + std::to_string(h);
    query.push_back(&store.add(p + ".W_q", {head_dim, model_dim}, Init::uniform_fan_in));
    key.push_back(&store.add(p + ".W_k", {head_dim, model_dim}, Init::uniform_fan_in));
    value.push_back(&store.add(p + ".W_v", {head_dim, model_dim}, Init::uniform_fan_in));
  }
  output = &store.add(prefix + ".W_o", {model_dim, model_dim}, Init::uniform_fan_in);
}

std::vector<ad::Var> MultiHeadAttention::forward(ad::Tape& tape, std::span<const ad::Var> queries,
                                                 std::span<const ad::Var> keys, const KeyMaskFn& mask,
                                                 AttentionTrace* trace) const {
  using namespace ad;
  for (const Var& v : queries)
    if (v.size() != model_dim_) throw DimensionError("attention query width " + std::to_string(v.size()) +
                                                     " != model width " + std::to_string(model_dim_));
  for (const Var& v : keys)
    if (v.size() != model_dim_) throw DimensionError("attention key width " + std::to_string(v.size()) +
                                                     " != model width " + std::to_string(model_dim_));
  if (keys.empty()) throw ArgumentError("attention over an empty key sequence");
  const std::size_t head_dim = model_dim_ / heads();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  if (trace) trace->assign(heads(), {});

  std::vector<std::vector<Var>> head_outputs(queries.size());
  for (std::size_t h = 0; h < heads(); ++h) {
    const Var wq = tape.param(*query[h]);
    const Var wk = tape.param(*key[h]);
    const Var wv = tape.param(*value[h]);
    std::vector<Var> ks, vs;
    ks.reserve(keys.size());
    vs.reserve(keys.size());
    for (const Var& k : keys) {
      ks.push_back(matvec(wk, k));
      vs.push_back(matvec(wv, k));
    }
    const Var key_matrix = stack(ks);
    const Var value_matrix = stack(vs);
    for (std::size_t t = 0; t < queries.size(); ++t) {
      const Var q = matvec(wq, queries[t]);
      const Var weights = masked_softmax(matvec(key_matrix, q), scale, mask ? mask(t) : std::vector<bool>{});
      if (trace) (*trace)[h].emplace_back(weights.value().begin(), weights.value().end());
      head_outputs[t].push_back(matvec_t(value_matrix, weights));
    }
  }
  std::vector<Var> out;
  out.reserve(queries.size());
  const Var wo = tape.param(*output);
  for (auto& parts : head_outputs) out.push_back(matvec(wo, concat(parts)));
  return out;
}

FeedForward::FeedForward(ParamStore& store, const std::string& prefix, std::size_t model_dim,
                         std::size_t hidden_dim) {
  w1 = &store.add(prefix + ".W1", {hidden_dim, model_dim}, Init::uniform_fan_in);
  b1 = &store.add(prefix + ".b1", {hidden_dim}, Init::zeros);
  w2 = &store.add(prefix + ".W2", {model_dim, hidden_dim}, Init::uniform_fan_in);
  b2 = &store.add(prefix + ".b2", {model_dim}, Init::zeros);
}

ad::Var FeedForward::forward(ad::Tape& tape, ad::Var x) const {
  using namespace ad;
  const Var hidden = relu(add(matvec(tape.param(*w1), x), tape.param(*b1)));
  return add(matvec(tape.param(*w2), hidden), tape.param(*b2));
}

LayerNormParams::LayerNormParams(ParamStore& store, const std::string& prefix, std::size_t dim) {
  gain = &store.add(prefix + ".gain", {dim}, Init::ones);
  bias = &store.add(prefix + ".bias", {dim}, Init::zeros);
}

ad::Var LayerNormParams::forward(ad::Tape& tape, ad::Var x) const {
  return ad::layer_norm(x, tape.param(*gain), tape.param(*bias));
}

SelfAttentionBlock::SelfAttentionBlock(ParamStore& store, const std::string& prefix, std::size_t model_dim,
                                       std::size_t heads, std::size_t ff_dim)
    : attention(store, prefix + ".attn", model_dim, heads),
      norm1(store, prefix + ".norm1", model_dim),
      ffn(store, prefix + ".ffn", model_dim, ff_dim),
      norm2(store, prefix + ".norm2", model_dim) {}

std::vector<ad::Var> SelfAttentionBlock::forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                                                 const std::vector<bool>& key_mask, AttentionTrace* trace) const {
  if (!key_mask.empty() && key_mask.size() != inputs.size()) {
    throw DimensionError("key mask length " + std::to_string(key_mask.size()) + " for " +
                         std::to_string(inputs.size()) + " positions");
  }
  KeyMaskFn mask;
  if (!key_mask.empty()) mask = [&key_mask](std::size_t) { return key_mask; };
  const auto attended = attention.forward(tape, inputs, inputs, mask, trace);
  std::vector<ad::Var> out;
  out.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const ad::Var a = norm1.forward(tape, ad::add(inputs[t], attended[t]));
    out.push_back(norm2.forward(tape, ad::add(a, ffn.forward(tape, a))));
  }
  return out;
}

DecoderBlock::DecoderBlock(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t heads,
                           std::size_t ff_dim)
    : self_attention(store, prefix + ".self", model_dim, heads),
      norm1(store, prefix + ".norm1", model_dim),
      cross_attention(store, prefix + ".cross", model_dim, heads),
      norm2(store, prefix + ".norm2", model_dim),
      ffn(store, prefix + ".ffn", model_dim, ff_dim),
      norm3(store, prefix + ".norm3", model_dim) {}

std::vector<ad::Var> DecoderBlock::forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                                           std::span<const ad::Var> memory) const {
  const std::size_t n = inputs.size();
  const KeyMaskFn causal = [n](std::size_t t) {
    std::vector<bool> visible(n, false);
    for (std::size_t m = 0; m <= t; ++m) visible[m] = true;
    return visible;
  };
  const auto self = self_attention.forward(tape, inputs, inputs, causal);
  std::vector<ad::Var> a(n);
  for (std::size_t t = 0; t < n; ++t) a[t] = norm1.forward(tape, ad::add(inputs[t], self[t]));
  const auto cross = cross_attention.forward(tape, a, memory);
  std::vector<ad::Var> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const ad::Var b = norm2.forward(tape, ad::add(a[t], cross[t]));
    out[t] = norm3.forward(tape, ad::add(b, ffn.forward(tape, b)));
  }
  return out;
}

}  // namespace rgse
