// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/model.hpp"

#include <algorithm>
#include <cmath>

#include "rgse/errors.hpp"

namespace rgse {

namespace {

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(const ExperimentConfig& config, std::size_t source_vocab, std::size_t target_vocab)
    : config_(config), source_vocab_(source_vocab), target_vocab_(target_vocab), store_(config.seed) {
  if (source_vocab <= static_cast<std::size_t>(Vocab::kUnk) || target_vocab <= static_cast<std::size_t>(Vocab::kUnk)) {
    throw ArgumentError("vocabularies must include the reserved tokens");
  }
}

void Seq2SeqModel::check_aligned(const DepGraph& graph, std::span<const int> ids) const {
  if (ids.size() != graph.size()) {
    throw DimensionError("source has " + std::to_string(ids.size()) + " ids but the graph has " +
                         std::to_string(graph.size()) + " tokens");
  }
  if (ids.empty()) throw ArgumentError("empty source sentence");
}

AdditiveAttention::AdditiveAttention(ParamStore& store, const std::string& prefix, std::size_t state_dim,
                                     std::size_t memory_dim, std::size_t attention_dim)
    : w_state(&store.add(prefix + ".W_state", {attention_dim, state_dim}, Init::uniform_fan_in)),
      w_memory(&store.add(prefix + ".W_memory", {attention_dim, memory_dim}, Init::uniform_fan_in)),
      v(&store.add(prefix + ".v", {attention_dim}, Init::uniform_fan_in)) {}

ad::Var AdditiveAttention::project_keys(ad::Tape& tape, ad::Var stacked_memory) const {
  // (M U^T) has rows U m_m.
  const ad::Var u = tape.param(*w_memory);
  return ad::matmul(stacked_memory, ad::transpose(u));
}

ad::Var AdditiveAttention::weights(ad::Tape& tape, ad::Var state, ad::Var keys) const {
  const ad::Var query = ad::matvec(tape.param(*w_state), state);
  return ad::softmax(ad::additive_scores(keys, query, tape.param(*v)));
}

RnmtModel::RnmtModel(const ExperimentConfig& config, std::size_t source_vocab, std::size_t target_vocab,
                     const std::vector<std::string>& edge_labels)
    : Seq2SeqModel(config, source_vocab, target_vocab) {
  const auto& c = config_;
  if (c.share_embeddings) {
    src_embed_ = EmbeddingTable(store_, "embed.shared", source_vocab, c.d_emb);
    tgt_embed_ = src_embed_;
  } else {
    src_embed_ = EmbeddingTable(store_, "embed.src", source_vocab, c.d_emb);
    tgt_embed_ = EmbeddingTable(store_, "embed.tgt", target_vocab, c.d_emb);
  }
  encoder_ = BiGru(store_, "enc.bigru", c.d_emb, c.d_hidden);
  const std::size_t h = encoder_.output_dim();
  memory_dim_ = h;
  if (c.encoder == EncoderKind::rgse) {
    rgse_.emplace(store_, "enc.rgse", RgseOptions{h, c.variant, c.phi, c.tau});
    memory_dim_ = rgse_->output_dim();
  } else if (c.encoder == EncoderKind::gcn) {
    for (std::size_t l = 0; l < c.gcn_layers; ++l) {
      gcn_.push_back(std::make_unique<GcnLayer>(store_, "enc.gcn" + std::to_string(l + 1), h, h, edge_labels,
                                                c.gcn_edge_dropout));
    }
  }
  init_w_ = &store_.add("dec.init.W", {c.d_dec, memory_dim_}, Init::uniform_fan_in);
  init_b_ = &store_.add("dec.init.b", {c.d_dec}, Init::zeros);
  attention_ = AdditiveAttention(store_, "dec.attn", c.d_dec, memory_dim_, c.d_att);
  decoder_ = GruCell(store_, "dec.gru", c.d_emb + memory_dim_, c.d_dec);
  out_w_ = &store_.add("dec.out.W", {target_vocab, c.d_dec + memory_dim_}, Init::uniform_fan_in);
  out_b_ = &store_.add("dec.out.b", {target_vocab}, Init::zeros);
}

std::vector<ad::Var> RnmtModel::encode(ad::Tape& tape, const DepGraph& graph, std::span<const int> ids,
                                       bool training, Rng* rng) const {
  check_aligned(graph, ids);
  std::vector<ad::Var> h = bigru_encode(tape, ids, src_embed_, encoder_);
  if (rgse_) return rgse_->forward(tape, h, graph).eta;
  for (const auto& layer : gcn_) h = layer->forward(tape, h, graph, training, rng);
  return h;
}

RnmtMemory RnmtModel::prepare_memory(ad::Tape& tape, std::vector<ad::Var> memory) const {
  if (memory.empty()) throw ArgumentError("decoder memory is empty");
  RnmtMemory out;
  out.stacked = ad::stack(memory);
  out.keys = attention_.project_keys(tape, out.stacked);
  out.states = std::move(memory);
  return out;
}

ad::Var RnmtModel::initial_state(ad::Tape& tape, const RnmtMemory& memory) const {
  const auto& states = memory.states;
  const ad::Var mean = ad::scale(ad::add_n(states), 1.0 / static_cast<double>(states.size()));
  return ad::tanh(ad::add(ad::matvec(tape.param(*init_w_), mean), tape.param(*init_b_)));
}

DecodeStep RnmtModel::decode_step(ad::Tape& tape, int prev_token, ad::Var state, const RnmtMemory& memory) const {
  DecodeStep out;
  out.weights = attention_.weights(tape, state, memory.keys);
  const ad::Var context = ad::matvec_t(memory.stacked, out.weights);
  const ad::Var input = ad::concat(tgt_embed_.lookup(tape, prev_token), context);
  out.state = decoder_.step(tape, input, state);
  out.logits = ad::add(ad::matvec(tape.param(*out_w_), ad::concat(out.state, context)), tape.param(*out_b_));
  return out;
}

ad::Var RnmtModel::loss(ad::Tape& tape, const DepGraph& graph, std::span<const int> source,
                        std::span<const int> target, bool training, Rng* rng) const {
  const RnmtMemory memory = prepare_memory(tape, encode(tape, graph, source, training, rng));
  ad::Var state = initial_state(tape, memory);
  std::vector<ad::Var> terms;
  terms.reserve(target.size() + 1);
  int prev = Vocab::kBos;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const int gold = t < target.size() ? target[t] : Vocab::kEos;
    DecodeStep step = decode_step(tape, prev, state, memory);
    terms.push_back(ad::cross_entropy(step.logits, static_cast<std::size_t>(gold)));
    state = step.state;
    prev = gold;
  }
  return ad::add_n(terms);
}

std::vector<int> RnmtModel::greedy_decode(const DepGraph& graph, std::span<const int> source,
                                          std::size_t max_len) const {
  ad::Tape tape;
  const RnmtMemory memory = prepare_memory(tape, encode(tape, graph, source));
  ad::Var state = initial_state(tape, memory);
  std::vector<int> out;
  int prev = Vocab::kBos;
  while (out.size() < max_len) {
    DecodeStep step = decode_step(tape, prev, state, memory);
    const int next = static_cast<int>(argmax(step.logits.value()));
    if (next == Vocab::kEos) break;
    out.push_back(next);
    state = step.state;
    prev = next;
  }
  return out;
}

RgseEncoderLayer::RgseEncoderLayer(ParamStore& store, const std::string& prefix, std::size_t model_dim,
                                   std::size_t ff_dim, const RgseOptions& options)
    : bigru(store, prefix + ".bigru", model_dim, model_dim / 2),
      rgse(std::make_unique<RgseLayer>(store, prefix + ".rgse", options)),
      proj_w(&store.add(prefix + ".proj.W", {model_dim, 2 * model_dim}, Init::uniform_fan_in)),
      proj_b(&store.add(prefix + ".proj.b", {model_dim}, Init::zeros)),
      norm1(store, prefix + ".norm1", model_dim),
      ffn(store, prefix + ".ffn", model_dim, ff_dim),
      norm2(store, prefix + ".norm2", model_dim) {
  if (model_dim % 2 != 0) throw ArgumentError("RGSE encoder layer needs an even model width");
  if (options.dim != model_dim) throw ArgumentError("RGSE width must equal the model width");
}

std::vector<ad::Var> RgseEncoderLayer::forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                                               const DepGraph& graph) const {
  const auto h = bigru.encode(tape, inputs);
  const auto eta = rgse->forward(tape, h, graph).eta;
  const ad::Var w = tape.param(*proj_w);
  const ad::Var b = tape.param(*proj_b);
  std::vector<ad::Var> out;
  out.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const ad::Var a = norm1.forward(tape, ad::add(inputs[t], ad::add(ad::matvec(w, eta[t]), b)));
    out.push_back(norm2.forward(tape, ad::add(a, ffn.forward(tape, a))));
  }
  return out;
}

HybridTransformer::HybridTransformer(const ExperimentConfig& config, std::size_t source_vocab,
                                     std::size_t target_vocab)
    : Seq2SeqModel(config, source_vocab, target_vocab) {
  const auto& c = config_;
  const std::size_t d = c.d_model;
  if (d % 2 != 0) throw ConfigError("model.d_model: must be even");
  if (d % c.heads != 0) throw ConfigError("model.heads: must divide model.d_model");
  const bool use_rgse = c.encoder == EncoderKind::rgse && !c.rgse_layers.empty();
  if (use_rgse && c.rgse_layers.last > c.layers) {
    throw ConfigError("rgse.layers: range " + c.rgse_layers.to_string() + " exceeds model.layers = " +
                      std::to_string(c.layers));
  }
  if (c.share_embeddings) {
    src_embed_ = EmbeddingTable(store_, "embed.shared", source_vocab, d);
    tgt_embed_ = src_embed_;
  } else {
    src_embed_ = EmbeddingTable(store_, "embed.src", source_vocab, d);
    tgt_embed_ = EmbeddingTable(store_, "embed.tgt", target_vocab, d);
  }
  for (std::size_t l = 1; l <= c.layers; ++l) {
    const std::string prefix = "enc.layer" + std::to_string(l);
    Layer layer;
    if (use_rgse && c.rgse_layers.contains(l)) {
      layer.rgse = std::make_unique<RgseEncoderLayer>(store_, prefix, d, c.d_ff, RgseOptions{d, c.variant, c.phi, c.tau});
    } else {
      layer.attention = std::make_unique<SelfAttentionBlock>(store_, prefix, d, c.heads, c.d_ff);
    }
    layers_.push_back(std::move(layer));
  }
  for (std::size_t l = 1; l <= c.dec_layers; ++l) {
    decoder_.push_back(std::make_unique<DecoderBlock>(store_, "dec.layer" + std::to_string(l), d, c.heads, c.d_ff));
  }
  out_w_ = &store_.add("dec.out.W", {target_vocab, d}, Init::uniform_fan_in);
  out_b_ = &store_.add("dec.out.b", {target_vocab}, Init::zeros);
}

bool HybridTransformer::is_rgse_layer(std::size_t layer) const {
  return layer >= 1 && layer <= layers_.size() && layers_[layer - 1].rgse != nullptr;
}

const RgseEncoderLayer* HybridTransformer::rgse_layer(std::size_t layer) const {
  return is_rgse_layer(layer) ? layers_[layer - 1].rgse.get() : nullptr;
}

const SelfAttentionBlock* HybridTransformer::attention_layer(std::size_t layer) const {
  if (layer < 1 || layer > layers_.size()) return nullptr;
  return layers_[layer - 1].attention.get();
}

std::vector<ad::Var> HybridTransformer::embed(ad::Tape& tape, const EmbeddingTable& table,
                                              std::span<const int> ids) const {
  const double scale = std::sqrt(static_cast<double>(config_.d_model));
  std::vector<ad::Var> out;
  out.reserve(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    out.push_back(ad::add(ad::scale(table.lookup(tape, ids[t]), scale),
                          tape.constant(positional_encoding(t, config_.d_model))));
  }
  return out;
}

std::vector<std::vector<ad::Var>> HybridTransformer::encode_layers(ad::Tape& tape, const DepGraph& graph,
                                                                   std::span<const int> ids) const {
  check_aligned(graph, ids);
  std::vector<std::vector<ad::Var>> outputs;
  outputs.push_back(embed(tape, src_embed_, ids));
  for (const Layer& layer : layers_) {
    const auto& x = outputs.back();
    outputs.push_back(layer.rgse ? layer.rgse->forward(tape, x, graph) : layer.attention->forward(tape, x));
  }
  return outputs;
}

std::vector<ad::Var> HybridTransformer::encode(ad::Tape& tape, const DepGraph& graph, std::span<const int> ids,
                                               bool, Rng*) const {
  return encode_layers(tape, graph, ids).back();
}

std::vector<ad::Var> HybridTransformer::decode_states(ad::Tape& tape, std::span<const int> prefix,
                                                      std::span<const ad::Var> memory) const {
  std::vector<ad::Var> x = embed(tape, tgt_embed_, prefix);
  for (const auto& block : decoder_) x = block->forward(tape, x, memory);
  return x;
}

ad::Var HybridTransformer::logits(ad::Tape& tape, ad::Var state) const {
  return ad::add(ad::matvec(tape.param(*out_w_), state), tape.param(*out_b_));
}

ad::Var HybridTransformer::loss(ad::Tape& tape, const DepGraph& graph, std::span<const int> source,
                                std::span<const int> target, bool training, Rng* rng) const {
  const auto memory = encode(tape, graph, source, training, rng);
  std::vector<int> prefix{Vocab::kBos};
  prefix.insert(prefix.end(), target.begin(), target.end());
  const auto states = decode_states(tape, prefix, memory);
  std::vector<ad::Var> terms;
  terms.reserve(states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    const int gold = t < target.size() ? target[t] : Vocab::kEos;
    terms.push_back(ad::cross_entropy(logits(tape, states[t]), static_cast<std::size_t>(gold)));
  }
  return ad::add_n(terms);
}

std::vector<int> HybridTransformer::greedy_decode(const DepGraph& graph, std::span<const int> source,
                                                  std::size_t max_len) const {
  ad::Tape encoder_tape;
  const auto memory_vars = encode(encoder_tape, graph, source);
  std::vector<Tensor> memory_values;
  for (const ad::Var& m : memory_vars) memory_values.push_back(Tensor::vector({m.value().begin(), m.value().end()}));

  std::vector<int> prefix{Vocab::kBos};
  std::vector<int> out;
  while (out.size() < max_len) {
    ad::Tape tape;
    std::vector<ad::Var> memory;
    for (const Tensor& m : memory_values) memory.push_back(tape.constant(m));
    const auto states = decode_states(tape, prefix, memory);
    const int next = static_cast<int>(argmax(logits(tape, states.back()).value()));
    if (next == Vocab::kEos) break;
    out.push_back(next);
    prefix.push_back(next);
  }
  return out;
}

std::unique_ptr<Seq2SeqModel> build_model(const ExperimentConfig& config, std::size_t source_vocab,
                                          std::size_t target_vocab, const std::vector<std::string>& edge_labels) {
  if (config.share_embeddings && source_vocab != target_vocab) {
    throw ConfigError("model.share_embeddings: source vocabulary (" + std::to_string(source_vocab) +
                      ") and target vocabulary (" + std::to_string(target_vocab) + ") differ in size");
  }
  if (config.model_kind == ModelKind::rnmt) {
    return std::make_unique<RnmtModel>(config, source_vocab, target_vocab, edge_labels);
  }
  return std::make_unique<HybridTransformer>(config, source_vocab, target_vocab);
}

std::size_t decode_limit(const ExperimentConfig& config, std::size_t source_length) {
  return config.decode_max_len != 0 ? config.decode_max_len : 2 * source_length + 10;
}

}  // namespace rgse
