// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/gcn.hpp"

#include <spdlog/spdlog.h>

#include "rgse/errors.hpp"

namespace rgse {

GcnLayer::GcnLayer(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t output_dim,
                   const std::vector<std::string>& labels, double edge_dropout)
    : output_dim_(output_dim), edge_dropout_(edge_dropout), prefix_(prefix) {
  if (!(edge_dropout >= 0.0 && edge_dropout <= 1.0)) {
    throw ArgumentError("edge dropout rate must lie in [0, 1], got " + std::to_string(edge_dropout));
  }
  w_in = &store.add(prefix + ".W_in", {output_dim, input_dim}, Init::uniform_fan_in);
  w_out = &store.add(prefix + ".W_out", {output_dim, input_dim}, Init::uniform_fan_in);
  w_self = &store.add(prefix + ".W_self", {output_dim, input_dim}, Init::uniform_fan_in);
  label_bias["self"] = &store.add(prefix + ".b_lab.self", {output_dim}, Init::zeros);
  for (const std::string& label : labels) {
    if (label_bias.count(label)) continue;
    label_bias[label] = &store.add(prefix + ".b_lab." + label, {output_dim}, Init::zeros);
  }
  default_bias = &store.add(prefix + ".b_default", {output_dim}, Init::zeros);
}

Tensor* GcnLayer::bias_for(const std::string& label) const {
  if (auto it = label_bias.find(label); it != label_bias.end()) return it->second;
  std::lock_guard lock(warned_mutex_);
  if (warned_labels_.insert(label).second) {
    spdlog::warn("{}: no bias registered for label '{}', using the shared default", prefix_, label);
  }
  return default_bias;
}

std::vector<ad::Var> GcnLayer::forward(ad::Tape& tape, std::span<const ad::Var> inputs, const DepGraph& graph,
                                       bool training, Rng* rng) const {
  using namespace ad;
  if (inputs.size() != graph.size()) {
    throw DimensionError("GCN got " + std::to_string(inputs.size()) + " inputs for a graph of " +
                         std::to_string(graph.size()) + " tokens");
  }
  const bool dropping = training && edge_dropout_ > 0.0;
  if (dropping && rng == nullptr) throw ArgumentError("GCN edge dropout needs a random source");

  const Var win = tape.param(*w_in), wout = tape.param(*w_out), wself = tape.param(*w_self);
  const std::size_t n = inputs.size();
  std::vector<Var> as_in(n), as_out(n);
  std::vector<std::vector<Var>> terms(n);
  for (std::size_t v = 0; v < n; ++v) {
    as_in[v] = matvec(win, inputs[v]);
    as_out[v] = matvec(wout, inputs[v]);
    terms[v].push_back(matvec(wself, inputs[v]));
    terms[v].push_back(tape.param(*label_bias.at("self")));
  }
  auto keep = [&] { return !dropping || !rng->bernoulli(edge_dropout_); };
  for (const DepEdge& e : graph.edges()) {
    const Var bias = tape.param(*bias_for(e.label));
    // The dependent's state flows into its head along `in`...
    if (keep()) {
      terms[e.head].push_back(as_in[e.dependent]);
      terms[e.head].push_back(bias);
    }
    // ...and the head's state flows into the dependent along `out`.
    if (keep()) {
      terms[e.dependent].push_back(as_out[e.head]);
      terms[e.dependent].push_back(bias);
    }
  }
  std::vector<Var> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = relu(add_n(terms[v]));
  return out;
}

}  // namespace rgse
