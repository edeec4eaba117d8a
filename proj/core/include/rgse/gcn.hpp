// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rgse/autodiff.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/param_store.hpp"
#include "rgse/rng.hpp"

namespace rgse {

/// Syntactic graph convolution with direction-specific weights and
/// label-specific biases:
///
///   h_v = relu( sum_u W_dir(u,v) h_u + b_lab(u,v) )
///
/// dir is `in` when u is a dependent of v, `out` when u is v's head, and
/// `self` for the loop at v (label "self"). In training mode each non-self
/// contribution is dropped independently with probability edge_dropout.
class GcnLayer {
 public:
  GcnLayer() = default;
  GcnLayer(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t output_dim,
           const std::vector<std::string>& labels, double edge_dropout);

  /// `rng` is required when training with a non-zero dropout rate.
  std::vector<ad::Var> forward(ad::Tape& tape, std::span<const ad::Var> inputs, const DepGraph& graph,
                               bool training, Rng* rng = nullptr) const;

  double edge_dropout() const { return edge_dropout_; }
  std::size_t output_dim() const { return output_dim_; }

  Tensor* w_in = nullptr;
  Tensor* w_out = nullptr;
  Tensor* w_self = nullptr;
  /// Per-label biases, plus "self"; unregistered labels use `default_bias`.
  std::map<std::string, Tensor*> label_bias;
  Tensor* default_bias = nullptr;

 private:
  Tensor* bias_for(const std::string& label) const;

  std::size_t output_dim_ = 0;
  double edge_dropout_ = 0.0;
  std::string prefix_;
  mutable std::mutex warned_mutex_;
  mutable std::set<std::string> warned_labels_;
};

}  // namespace rgse
