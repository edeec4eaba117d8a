// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgse/autodiff.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/gru.hpp"
#include "rgse/param_store.hpp"

namespace rgse {

/// Which recurrent directions run, and which temporal class of edges each
/// node reads relative to its traversal direction.
enum class RgseVariant {
  forward,    ///< left-to-right only, all edges; the backward half is zeros
  bi_total,   ///< both directions, all edges
  bi_past,    ///< both directions, self + edges from already-visited positions
  bi_future,  ///< both directions, self + edges from not-yet-visited positions
};

/// Reduction over the encoder states on a node's incoming edges.
enum class PhiMode { sum, average, gated };

/// Position-wise merge of graph-recurrent states with the base encoder state.
enum class TauMode { normal, gated };

std::string_view to_string(RgseVariant v);
std::string_view to_string(PhiMode m);
std::string_view to_string(TauMode m);
RgseVariant parse_variant(std::string_view s);
PhiMode parse_phi(std::string_view s);
TauMode parse_tau(std::string_view s);

/// Edge filter each variant applies in both scans.
EdgeFilter edge_filter(RgseVariant variant);

struct PhiConfig {
  PhiMode mode = PhiMode::sum;
  /// Gated mode only: gate = sigmoid(gate_matrix h + gate_bias), [d x d] and [d].
  Tensor* gate_matrix = nullptr;
  Tensor* gate_bias = nullptr;
};

/// Integration over E_in(s_j):
///   sum:     sum_i h_i
///   average: (1 / |E_in|) sum_i h_i
///   gated:   sum_i sigmoid(gate_matrix h_i + gate_bias) * h_i
/// `states` is indexed by edge source. Throws StateError on an empty edge list
/// (the self edge must always be present) and ArgumentError when gated mode
/// lacks its parameters.
ad::Var integrate(ad::Tape& tape, const PhiConfig& phi, std::span<const EdgeRef> edges,
                  std::span<const ad::Var> states);

struct ResidualConfig {
  TauMode mode = TauMode::normal;
  /// Gated mode only: lambda_dir = sigmoid(omega_dir * s + psi_dir * h), elementwise.
  Tensor* omega_forward = nullptr;
  Tensor* psi_forward = nullptr;
  Tensor* omega_backward = nullptr;
  Tensor* psi_backward = nullptr;
};

/// tau_n: concat(s_fwd + h, s_bwd + h)
/// tau_g: concat(l1 * s_fwd + (1 - l1) * h, l2 * s_bwd + (1 - l2) * h)
ad::Var combine(ad::Tape& tape, const ResidualConfig& tau, ad::Var s_forward, ad::Var s_backward, ad::Var h_tilde);

struct RgseStates {
  std::vector<ad::Var> forward;
  std::vector<ad::Var> backward;
};

/// Graph-recurrent scans over h_tilde. The forward scan visits t = 0..L-1 from
/// a zero state, feeding phi(E_in(s_t)) into `forward_cell`; the backward scan
/// mirrors it from the right with `backward_cell`. For RgseVariant::forward the
/// backward states are zero vectors and `backward_cell` may be null.
RgseStates rgse_propagate(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph,
                          RgseVariant variant, const PhiConfig& phi, const GruCell& forward_cell,
                          const GruCell* backward_cell);

struct RgseOutput {
  std::vector<ad::Var> s_forward;
  std::vector<ad::Var> s_backward;
  /// Width 2 * dim per position.
  std::vector<ad::Var> eta;
};

struct RgseOptions {
  /// Width of h_tilde; the recurrent state has the same width so both
  /// residual modes are shape-legal.
  std::size_t dim = 0;
  RgseVariant variant = RgseVariant::bi_total;
  PhiMode phi = PhiMode::gated;
  TauMode tau = TauMode::gated;
};

/// One graph-recurrent encoder layer with its own parameters. The forward
/// variant registers no backward cell. Gate parameters exist only in the
/// modes that read them.
class RgseLayer {
 public:
  RgseLayer(ParamStore& store, const std::string& prefix, const RgseOptions& options);

  RgseStates propagate(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph) const;
  std::vector<ad::Var> combine(ad::Tape& tape, const RgseStates& states, std::span<const ad::Var> h_tilde) const;
  RgseOutput forward(ad::Tape& tape, std::span<const ad::Var> h_tilde, const DepGraph& graph) const;

  const RgseOptions& options() const { return options_; }
  const PhiConfig& phi() const { return phi_; }
  const ResidualConfig& residual() const { return tau_; }
  const GruCell& forward_cell() const { return forward_cell_; }
  const GruCell* backward_cell() const { return backward_cell_ ? &*backward_cell_ : nullptr; }
  std::size_t output_dim() const { return 2 * options_.dim; }

 private:
  RgseOptions options_;
  PhiConfig phi_;
  ResidualConfig tau_;
  GruCell forward_cell_;
  std::optional<GruCell> backward_cell_;
};

}  // namespace rgse
