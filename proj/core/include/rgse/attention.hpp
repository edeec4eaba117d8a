// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rgse/autodiff.hpp"
#include "rgse/param_store.hpp"

namespace rgse {

/// Fixed sinusoidal position embedding: dim 2j = sin(t / 10000^(2j/d)),
/// dim 2j+1 = cos(same angle). Throws ArgumentError for odd d.
std::vector<double> positional_encoding(std::size_t position, std::size_t dim);

/// Attention weights recorded during a forward pass: [head][query][key].
using AttentionTrace = std::vector<std::vector<std::vector<double>>>;

/// Visible keys for query t; an empty vector means all keys.
using KeyMaskFn = std::function<std::vector<bool>(std::size_t query)>;

/// Multi-head scaled dot-product attention, per-head scale 1/sqrt(d/heads).
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t heads);

  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> queries, std::span<const ad::Var> keys,
                               const KeyMaskFn& mask = {}, AttentionTrace* trace = nullptr) const;

  std::size_t model_dim() const { return model_dim_; }
  std::size_t heads() const { return query.size(); }

  std::vector<Tensor*> query;
  std::vector<Tensor*> key;
  std::vector<Tensor*> value;
  Tensor* output = nullptr;

 private:
  std::size_t model_dim_ = 0;
};

/// relu(W1 x + b1) fed through W2 x + b2.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t hidden_dim);

  ad::Var forward(ad::Tape& tape, ad::Var x) const;

  Tensor* w1 = nullptr;
  Tensor* b1 = nullptr;
  Tensor* w2 = nullptr;
  Tensor* b2 = nullptr;
};

struct LayerNormParams {
  LayerNormParams() = default;
  LayerNormParams(ParamStore& store, const std::string& prefix, std::size_t dim);
  ad::Var forward(ad::Tape& tape, ad::Var x) const;

  Tensor* gain = nullptr;
  Tensor* bias = nullptr;
};

/// Post-norm encoder layer: LN(x + MHA(x)), then LN(a + FFN(a)).
class SelfAttentionBlock {
 public:
  SelfAttentionBlock() = default;
  SelfAttentionBlock(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t heads,
                     std::size_t ff_dim);

  /// `key_mask[m]` false hides key m from every query (padding).
  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                               const std::vector<bool>& key_mask = {}, AttentionTrace* trace = nullptr) const;

  std::size_t model_dim() const { return attention.model_dim(); }

  MultiHeadAttention attention;
  LayerNormParams norm1;
  FeedForward ffn;
  LayerNormParams norm2;
};

/// Post-norm decoder layer: causal self-attention, attention over the encoder
/// memory, then FFN, each followed by residual + layer norm.
class DecoderBlock {
 public:
  DecoderBlock() = default;
  DecoderBlock(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t heads,
               std::size_t ff_dim);

  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                               std::span<const ad::Var> memory) const;

  MultiHeadAttention self_attention;
  LayerNormParams norm1;
  MultiHeadAttention cross_attention;
  LayerNormParams norm2;
  FeedForward ffn;
  LayerNormParams norm3;
};

}  // namespace rgse
