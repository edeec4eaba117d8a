// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rgse/attention.hpp"
#include "rgse/autodiff.hpp"
#include "rgse/config.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/embedding.hpp"
#include "rgse/gcn.hpp"
#include "rgse/gru.hpp"
#include "rgse/param_store.hpp"
#include "rgse/rgse_layer.hpp"
#include "rgse/rng.hpp"

namespace rgse {

/// Encoder-decoder translation model over dependency-annotated source
/// sentences. Owns its parameters.
class Seq2SeqModel {
 public:
  virtual ~Seq2SeqModel() = default;

  /// Memory the decoder attends over, one vector per source position.
  /// `ids` must align with `graph` (DimensionError otherwise). `rng` feeds
  /// training-time edge dropout and may be null at inference.
  virtual std::vector<ad::Var> encode(ad::Tape& tape, const DepGraph& graph, std::span<const int> ids,
                                      bool training = false, Rng* rng = nullptr) const = 0;

  /// Summed teacher-forced cross-entropy over `target` followed by </s>.
  virtual ad::Var loss(ad::Tape& tape, const DepGraph& graph, std::span<const int> source,
                       std::span<const int> target, bool training = false, Rng* rng = nullptr) const = 0;

  /// Argmax decoding until </s> or `max_len` tokens; </s> is not returned.
  virtual std::vector<int> greedy_decode(const DepGraph& graph, std::span<const int> source,
                                         std::size_t max_len) const = 0;

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const ExperimentConfig& config() const { return config_; }
  std::size_t source_vocab() const { return source_vocab_; }
  std::size_t target_vocab() const { return target_vocab_; }

 protected:
  Seq2SeqModel(const ExperimentConfig& config, std::size_t source_vocab, std::size_t target_vocab);
  void check_aligned(const DepGraph& graph, std::span<const int> ids) const;

  ExperimentConfig config_;
  std::size_t source_vocab_;
  std::size_t target_vocab_;
  ParamStore store_;
};

/// Additive attention over the decoder state: e_m = v . tanh(W_s s + U m_m).
struct AdditiveAttention {
  AdditiveAttention() = default;
  AdditiveAttention(ParamStore& store, const std::string& prefix, std::size_t state_dim, std::size_t memory_dim,
                    std::size_t attention_dim);
  /// Rows U m_m for every memory position; computed once per sentence.
  ad::Var project_keys(ad::Tape& tape, ad::Var stacked_memory) const;
  /// Returns normalized weights over memory positions.
  ad::Var weights(ad::Tape& tape, ad::Var state, ad::Var keys) const;

  Tensor* w_state = nullptr;
  Tensor* w_memory = nullptr;
  Tensor* v = nullptr;
};

/// Encoder memory prepared once per sentence for repeated decoder steps.
struct RnmtMemory {
  std::vector<ad::Var> states;
  ad::Var stacked;
  ad::Var keys;
};

struct DecodeStep {
  ad::Var logits;
  ad::Var state;
  ad::Var weights;
};

/// Attentional GRU encoder-decoder. The BiGRU states h~ feed an optional RGSE
/// layer (memory = eta, width 4 * d_hidden) or a GCN stack; with the plain
/// encoder the memory is h~ itself.
class RnmtModel : public Seq2SeqModel {
 public:
  RnmtModel(const ExperimentConfig& config, std::size_t source_vocab, std::size_t target_vocab,
            const std::vector<std::string>& edge_labels = {});

  std::vector<ad::Var> encode(ad::Tape& tape, const DepGraph& graph, std::span<const int> ids, bool training = false,
                              Rng* rng = nullptr) const override;
  ad::Var loss(ad::Tape& tape, const DepGraph& graph, std::span<const int> source, std::span<const int> target,
               bool training = false, Rng* rng = nullptr) const override;
  std::vector<int> greedy_decode(const DepGraph& graph, std::span<const int> source,
                                 std::size_t max_len) const override;

  /// Throws ArgumentError on empty memory.
  RnmtMemory prepare_memory(ad::Tape& tape, std::vector<ad::Var> memory) const;
  /// tanh(W_init mean(memory) + b_init).
  ad::Var initial_state(ad::Tape& tape, const RnmtMemory& memory) const;
  /// Attends with `state`, advances the GRU on [emb(prev); context], and
  /// scores the target vocabulary from [new_state; context]. Unknown ids map
  /// to <unk>.
  DecodeStep decode_step(ad::Tape& tape, int prev_token, ad::Var state, const RnmtMemory& memory) const;

  std::size_t memory_dim() const { return memory_dim_; }
  const BiGru& base_encoder() const { return encoder_; }
  const RgseLayer* rgse() const { return rgse_ ? &*rgse_ : nullptr; }
  const EmbeddingTable& source_embeddings() const { return src_embed_; }
  const EmbeddingTable& target_embeddings() const { return tgt_embed_; }

 private:
  EmbeddingTable src_embed_;
  EmbeddingTable tgt_embed_;
  BiGru encoder_;
  std::optional<RgseLayer> rgse_;
  std::vector<std::unique_ptr<GcnLayer>> gcn_;
  std::size_t memory_dim_ = 0;
  Tensor* init_w_ = nullptr;
  Tensor* init_b_ = nullptr;
  AdditiveAttention attention_;
  GruCell decoder_;
  Tensor* out_w_ = nullptr;
  Tensor* out_b_ = nullptr;
};

/// Encoder layer that swaps self-attention for BiGRU + RGSE:
///   h~ = BiGRU(x) (d/2 per direction), eta = tau(RGSE(h~), h~),
///   a = LN(x + W_p eta + b_p), out = LN(a + FFN(a)).
class RgseEncoderLayer {
 public:
  RgseEncoderLayer(ParamStore& store, const std::string& prefix, std::size_t model_dim, std::size_t ff_dim,
                   const RgseOptions& options);
  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> inputs, const DepGraph& graph) const;

  BiGru bigru;
  std::unique_ptr<RgseLayer> rgse;
  Tensor* proj_w = nullptr;
  Tensor* proj_b = nullptr;
  LayerNormParams norm1;
  FeedForward ffn;
  LayerNormParams norm2;
};

/// Transformer whose encoder layers in `rgse_layers` are RgseEncoderLayers;
/// the rest are standard self-attention blocks. Parameter names depend only
/// on the layer index, so two configs share every common parameter bitwise.
class HybridTransformer : public Seq2SeqModel {
 public:
  HybridTransformer(const ExperimentConfig& config, std::size_t source_vocab, std::size_t target_vocab);

  std::vector<ad::Var> encode(ad::Tape& tape, const DepGraph& graph, std::span<const int> ids, bool training = false,
                              Rng* rng = nullptr) const override;
  /// Output of every encoder layer, input embedding stream first.
  std::vector<std::vector<ad::Var>> encode_layers(ad::Tape& tape, const DepGraph& graph,
                                                  std::span<const int> ids) const;
  ad::Var loss(ad::Tape& tape, const DepGraph& graph, std::span<const int> source, std::span<const int> target,
               bool training = false, Rng* rng = nullptr) const override;
  std::vector<int> greedy_decode(const DepGraph& graph, std::span<const int> source,
                                 std::size_t max_len) const override;

  bool is_rgse_layer(std::size_t layer) const;
  std::size_t layer_count() const { return layers_.size(); }
  const RgseEncoderLayer* rgse_layer(std::size_t layer) const;
  const SelfAttentionBlock* attention_layer(std::size_t layer) const;

 private:
  std::vector<ad::Var> embed(ad::Tape& tape, const EmbeddingTable& table, std::span<const int> ids) const;
  std::vector<ad::Var> decode_states(ad::Tape& tape, std::span<const int> prefix,
                                     std::span<const ad::Var> memory) const;
  ad::Var logits(ad::Tape& tape, ad::Var state) const;

  struct Layer {
    std::unique_ptr<RgseEncoderLayer> rgse;
    std::unique_ptr<SelfAttentionBlock> attention;
  };

  EmbeddingTable src_embed_;
  EmbeddingTable tgt_embed_;
  std::vector<Layer> layers_;
  std::vector<std::unique_ptr<DecoderBlock>> decoder_;
  Tensor* out_w_ = nullptr;
  Tensor* out_b_ = nullptr;
};

/// Throws ConfigError for shared embeddings over differently sized vocabularies.
std::unique_ptr<Seq2SeqModel> build_model(const ExperimentConfig& config, std::size_t source_vocab,
                                          std::size_t target_vocab, const std::vector<std::string>& edge_labels = {});

/// 2 * source length + 10 unless the config fixes it.
std::size_t decode_limit(const ExperimentConfig& config, std::size_t source_length);

}  // namespace rgse
