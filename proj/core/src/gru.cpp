// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/gru.hpp"

#include "rgse/errors.hpp"

namespace rgse {

GruCell::GruCell(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t state_dim)
    : input_dim_(input_dim), state_dim_(state_dim) {
  z_state = &store.add(prefix + ".z.W_state", {state_dim, state_dim}, Init::uniform_fan_in);
  z_input = &store.add(prefix + ".z.W_input", {state_dim, input_dim}, Init::uniform_fan_in);
  z_bias = &store.add(prefix + ".z.bias", {state_dim}, Init::zeros);
  r_state = &store.add(prefix + ".r.W_state", {state_dim, state_dim}, Init::uniform_fan_in);
  r_input = &store.add(prefix + ".r.W_input", {state_dim, input_dim}, Init::uniform_fan_in);
  r_bias = &store.add(prefix + ".r.bias", {state_dim}, Init::zeros);
  h_input = &store.add(prefix + ".h.W_input", {state_dim, input_dim}, Init::uniform_fan_in);
  h_state = &store.add(prefix + ".h.W_state", {state_dim, state_dim}, Init::uniform_fan_in);
}

ad::Var GruCell::step(ad::Tape& tape, ad::Var input, ad::Var state) const {
  if (input.size() != input_dim_ || state.size() != state_dim_) {
    throw DimensionError("GRU step expects input " + std::to_string(input_dim_) + " and state " +
                         std::to_string(state_dim_) + ", got " + shape_string(input.shape()) + " and " +
                         shape_string(state.shape()));
  }
  using namespace ad;
  const Var z_terms[] = {matvec(tape.param(*z_state), state), matvec(tape.param(*z_input), input),
                         tape.param(*z_bias)};
  const Var z = sigmoid(add_n(z_terms));
  const Var r_terms[] = {matvec(tape.param(*r_state), state), matvec(tape.param(*r_input), input),
                         tape.param(*r_bias)};
  const Var r = sigmoid(add_n(r_terms));
  const Var candidate =
      ad::tanh(add(matvec(tape.param(*h_input), input), matvec(tape.param(*h_state), mul(r, state))));
  return add(mul(z, state), mul(one_minus(z), candidate));
}

std::vector<ad::Var> run_gru(ad::Tape& tape, const GruCell& cell, std::span<const ad::Var> inputs, bool reverse) {
  const std::size_t n = inputs.size();
  std::vector<ad::Var> states(n);
  ad::Var state = tape.zeros(cell.state_dim());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    state = cell.step(tape, inputs[t], state);
    states[t] = state;
  }
  return states;
}

BiGru::BiGru(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim)
    : forward(store, prefix + ".fwd", input_dim, hidden_dim), backward(store, prefix + ".bwd", input_dim, hidden_dim) {}

std::vector<ad::Var> BiGru::encode(ad::Tape& tape, std::span<const ad::Var> inputs) const {
  if (inputs.empty()) throw ArgumentError("BiGRU over an empty sequence");
  const auto fwd = run_gru(tape, forward, inputs, false);
  const auto bwd = run_gru(tape, backward, inputs, true);
  std::vector<ad::Var> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) out[t] = ad::concat(fwd[t], bwd[t]);
  return out;
}

}  // namespace rgse
