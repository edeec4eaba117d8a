// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rgse/autodiff.hpp"
#include "rgse/param_store.hpp"

namespace rgse {

/// GRU cell in the form used by both the base encoder and the graph-recurrent layer:
///
///   z  = sigmoid(Wz_state s + Wz_input x + bz)
///   r  = sigmoid(Wr_state s + Wr_input x + br)
///   s' = tanh(Wh_input x + Wh_state (r * s))
///   s_new = z * s + (1 - z) * s'
///
/// The candidate has no bias term.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t state_dim);

  ad::Var step(ad::Tape& tape, ad::Var input, ad::Var state) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t state_dim() const { return state_dim_; }

  Tensor* z_state = nullptr;
  Tensor* z_input = nullptr;
  Tensor* z_bias = nullptr;
  Tensor* r_state = nullptr;
  Tensor* r_input = nullptr;
  Tensor* r_bias = nullptr;
  Tensor* h_input = nullptr;
  Tensor* h_state = nullptr;

 private:
  std::size_t input_dim_ = 0;
  std::size_t state_dim_ = 0;
};

/// Runs `cell` left to right (or right to left) from a zero state and
/// returns one state per input position, in input order.
std::vector<ad::Var> run_gru(ad::Tape& tape, const GruCell& cell, std::span<const ad::Var> inputs, bool reverse);

/// Two independent cells; the output at t is concat(forward_t, backward_t).
class BiGru {
 public:
  BiGru() = default;
  BiGru(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  std::vector<ad::Var> encode(ad::Tape& tape, std::span<const ad::Var> inputs) const;

  std::size_t output_dim() const { return 2 * forward.state_dim(); }

  GruCell forward;
  GruCell backward;
};

}  // namespace rgse
