// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/rgse_layer.hpp"

#include "rgse/errors.hpp"

namespace rgse {

std::string_view to_string(RgseVariant v) {
  switch (v) {
    case RgseVariant::forward: return "forward";
    case RgseVariant::bi_total: return "bi_total";
    case RgseVariant::bi_past: return "bi_past";
    case RgseVariant::bi_future: return "bi_future";
  }
  return "?";
}

std::string_view to_string(PhiMode m) {
  switch (m) {
    case PhiMode::sum: return "sum";
    case PhiMode::average: return "average";
    case PhiMode::gated: return "gated";
  }
  return "?";
}

std::string_view to_string(TauMode m) { return m == TauMode::normal ? "normal" : "gated"; }

RgseVariant parse_variant(std::string_view s) {
  for (auto v : {RgseVariant::forward, RgseVariant::bi_total, RgseVariant::bi_past, RgseVariant::bi_future})
    if (s == to_string(v)) return v;
  throw ArgumentError("unknown RGSE variant '" + std::string(s) + "' (forward, bi_total, bi_past, bi_future)");
}

PhiMode parse_phi(std::string_view s) {
  for (auto m : {PhiMode::sum, PhiMode::average, PhiMode::gated})
    if (s == to_string(m)) return m;
  throw ArgumentError("unknown integration mode '" + std::string(s) + "' (sum, average, gated)");
}

TauMode parse_tau(std::string_view s) {
  for (auto m : {TauMode::normal, TauMode::gated})
    if (s == to_string(m)) return m;
  throw ArgumentError("unknown residual mode '" + std::string(s) + "' (normal, gated)");
}

EdgeFilter edge_filter(RgseVariant variant) {
  switch (variant) {
    case RgseVariant::bi_past: return EdgeFilter::past_only;
    case RgseVariant::bi_future: return EdgeFilter::future_only;
    default: return EdgeFilter::total;
  }
}

namespace {

void require_gate(const PhiConfig& phi) {
  if (phi.gate_matrix == nullptr || phi.gate_bias == nullptr) {
    throw ArgumentError("gated integration needs gate_matrix and gate_bias");
  }
}

ad::Var gated_term(ad::Tape& tape, const PhiConfig& phi, ad::Var h) {
  const ad::Var gate = ad::sigmoid(ad::add(ad::matvec(tape.param(*phi.gate_matrix), h), tape.param(*phi.gate_bias)));
  return ad::mul(gate, h);
}

// Sums pre-transformed per-position terms over an edge list.
ad::Var reduce_edges(PhiMode mode, std::span<const EdgeRef> edges, std::span<const ad::Var> terms) {
  if (edges.empty()) throw StateError("integration over an empty edge list; the self edge is missing upstream");
  std::vector<ad::Var> picked;
  picked.reserve(edges.size());
  for (const EdgeRef& e : edges) {
    if (e.source >= terms.size()) {
      throw DimensionError("edge source " + std::to_string(e.source) + " outside " + std::to_string(terms.size()) +
                           " encoder states");
    }
    picked.push_back(terms[e.source]);
  }
  ad::Var total = picked.size() == 1 ? picked.front() : ad::add_n(picked);
  if (mode == PhiMode::average) total = ad::scale(total, 1.0 / static_cast<double>(edges.size()));
  return total;
}

}  // namespace

ad::Var integrate(ad::Tape& tape, const PhiConfig& phi, std::span<const EdgeRef> edges,
                  std::span<const ad::Var> states) {
  if (edges.empty()) throw StateError("integration over an empty edge list; the self edge is missing upstream");
  if (phi.mode != PhiMode::gated) return reduce_edges(phi.mode, edges, states);
  require_gate(phi);
  std::vector<ad::Var> terms(states.size());
  for (const EdgeRef& e : edges) {
    if (e.source >= states.size()) {
      throw DimensionError("edge source " + std::to_string(e.source) + " outside " + std::to_string(states.size()) +
                           " encoder states");
    }
    if (!terms[e.source].valid()) terms[e.source] = gated_term(tape, phi, states[e.source]);
  }
  return reduce_edges(PhiMode::sum, edges, terms);
}

ad::Var combine(ad::Tape& tape, const ResidualConfig& tau, ad::Var s_forward, ad::Var s_backward, ad::Var h_tilde) {
  using namespace ad;
  if (s_forward.shape() != h_tilde.shape() || s_backward.shape() != h_tilde.shape()) {
    throw DimensionError("residual combination needs equal widths, got s_fwd " + shape_string(s_forward.shape()) +
                         ", s_bwd " + shape_string(s_backward.shape()) + ", h " + shape_string(h_tilde.shape()));
  }
  if (tau.mode == TauMode::normal) return concat(add(s_forward, h_tilde), add(s_backward, h_tilde));
  if (!tau.omega_forward || !tau.psi_forward || !tau.omega_backward || !tau.psi_backward) {
    throw ArgumentError("gated residual needs omega and psi for both directions");
  }
  auto blend = [&](Var s, Tensor* omega, Tensor* psi) {
    const Var lambda = sigmoid(add(mul(tape.param(*omega), s), mul(tape.param(*psi), h_tilde)));
    return add(mul(lambda, s), mul(one_minus(lambda), h_tilde));
  };
  return concat(blend(s_forward, tau.omega_forward, tau.psi_forward),
                blend(s_backward, tau.omega_backward, tau.psi_backward));
}

RgseStates rgse_propagate(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph,
                          RgseVariant variant, const PhiConfig& phi, const GruCell& forward_cell,
                          const GruCell* backward_cell) {
  const std::size_t n = h_tilde.size();
  if (n != graph.size()) {
    throw DimensionError("RGSE got " + std::to_string(n) + " encoder states for a graph of " +
                         std::to_string(graph.size()) + " tokens");
  }
  const bool bidirectional = variant != RgseVariant::forward;
  if (bidirectional && backward_cell == nullptr) throw ArgumentError("bidirectional RGSE needs a backward cell");

  // The gate depends only on the source state, so each position is gated once
  // and shared by every node and both scans.
  std::vector<ad::Var> terms(h_tilde.begin(), h_tilde.end());
  PhiMode reduce_mode = phi.mode;
  if (phi.mode == PhiMode::gated) {
    require_gate(phi);
    for (std::size_t i = 0; i < n; ++i) terms[i] = gated_term(tape, phi, h_tilde[i]);
    reduce_mode = PhiMode::sum;
  }

  const EdgeFilter filter = edge_filter(variant);
  auto node_inputs = [&](Traversal traversal) {
    std::vector<ad::Var> inputs(n);
    for (std::size_t t = 0; t < n; ++t) {
      const auto edges = incoming_edges(graph, t, traversal, filter);
      inputs[t] = reduce_edges(reduce_mode, edges, terms);
    }
    return inputs;
  };

  RgseStates out;
  const auto forward_inputs = node_inputs(Traversal::forward);
  out.forward = run_gru(tape, forward_cell, forward_inputs, false);
  if (!bidirectional) {
    out.backward.assign(n, ad::Var{});
    for (auto& s : out.backward) s = tape.zeros(forward_cell.state_dim());
    return out;
  }
  // Unfiltered edge sets do not depend on traversal direction.
  const auto backward_inputs = filter == EdgeFilter::total ? forward_inputs : node_inputs(Traversal::backward);
  out.backward = run_gru(tape, *backward_cell, backward_inputs, true);
  return out;
}

RgseLayer::RgseLayer(ParamStore& store, const std::string& prefix, const RgseOptions& options)
    : options_(options) {
  const std::size_t d = options.dim;
  if (d == 0) throw ArgumentError("RGSE width must be positive");
  phi_.mode = options.phi;
  if (options.phi == PhiMode::gated) {
    phi_.gate_matrix = &store.add(prefix + ".phi.W_gate", {d, d}, Init::uniform_fan_in);
    phi_.gate_bias = &store.add(prefix + ".phi.b_gate", {d}, Init::zeros);
  }
  tau_.mode = options.tau;
  if (options.tau == TauMode::gated) {
    tau_.omega_forward = &store.add(prefix + ".tau.fwd.omega", {d}, Init::uniform_fan_in);
    tau_.psi_forward = &store.add(prefix + ".tau.fwd.psi", {d}, Init::uniform_fan_in);
    tau_.omega_backward = &store.add(prefix + ".tau.bwd.omega", {d}, Init::uniform_fan_in);
    tau_.psi_backward = &store.add(prefix + ".tau.bwd.psi", {d}, Init::uniform_fan_in);
  }
  forward_cell_ = GruCell(store, prefix + ".fwd", d, d);
  if (options.variant != RgseVariant::forward) backward_cell_.emplace(store, prefix + ".bwd", d, d);
}

RgseStates RgseLayer::propagate(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph) const {
  for (const ad::Var& h : h_tilde) {
    if (h.size() != options_.dim) {
      throw DimensionError("RGSE input width " + std::to_string(h.size()) + " != " + std::to_string(options_.dim));
    }
  }
  return rgse_propagate(tape, h_tilde, graph, options_.variant, phi_, forward_cell_, backward_cell());
}

std::vector<ad::Var> RgseLayer::combine(ad::Tape& tape, const RgseStates& states,
                                        std::span<const ad::Var> h_tilde) const {
  std::vector<ad::Var> eta(h_tilde.size());
  for (std::size_t t = 0; t < h_tilde.size(); ++t) {
    eta[t] = rgse::combine(tape, tau_, states.forward[t], states.backward[t], h_tilde[t]);
  }
  return eta;
}

RgseOutput RgseLayer::forward(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph) const {
  RgseStates states = propagate(tape, h_tilde, graph);
  RgseOutput out;
  out.eta = combine(tape, states, h_tilde);
  out.s_forward = std::move(states.forward);
  out.s_backward = std::move(states.backward);
  return out;
}

}  // namespace rgse
