// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "rgse/tensor.hpp"

namespace rgse::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

  const Shape& shape() const;
  std::span<const double> value() const;
  std::size_t size() const { return value().size(); }
  double operator[](std::size_t i) const { return value()[i]; }
  /// Value of a single-element variable.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Append-only record of operations for one forward pass.
///
/// Parameters enter through param(), which binds a ParamStore tensor once per
/// tape; backward() accumulates into that tensor's gradient slot. Nodes whose
/// inputs are all constants record no backward closure.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var constant(std::vector<double> values);
  Var scalar(double value);
  Var zeros(std::size_t n);
  Var param(Tensor& parameter);

  /// Seeds d(loss)/d(loss) = 1 and runs the tape in reverse. One call per tape.
  void backward(Var loss);

  /// Gradient of the last backward() with respect to v; zeros if v was unreachable.
  std::vector<double> grad(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  /// Sign of every piecewise-linear input seen so far (relu records x > 0),
  /// in evaluation order. Two passes with equal patterns stayed on the same
  /// linear piece of every kink.
  const std::vector<bool>& branch_pattern() const { return branches_; }
  void note_branch(bool taken) { branches_.push_back(taken); }

  // Op-author interface.
  Var record(Shape shape, std::vector<double> value, std::span<const Var> parents, BackwardFn fn);
  Var record(Shape shape, std::vector<double> value, std::initializer_list<Var> parents, BackwardFn fn) {
    return record(std::move(shape), std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                  std::move(fn));
  }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  const Shape& shape_of(std::size_t id) const { return nodes_[id].shape; }
  std::span<const double> value_of(std::size_t id) const { return nodes_[id].value; }
  /// Gradient buffer of a node, allocated zeroed on first use.
  std::span<double> grad_of(std::size_t id);

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    BackwardFn backward;
    Tensor* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> param_nodes_;
  std::vector<bool> branches_;
  bool backward_done_ = false;
};

// Elementwise. Operand shapes must match, except that either side may be a
// single-element scalar.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// 1 - a
Var one_minus(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);

/// Sum of same-shape operands.
Var add_n(std::span<const Var> terms);

// Linear algebra.
Var matmul(Var a, Var b);
Var transpose(Var a);
/// W[m x k] * x[k] -> [m]
Var matvec(Var w, Var x);
/// W[m x k]^T * x[m] -> [k]
Var matvec_t(Var w, Var x);

// Structure.
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
Var slice(Var v, std::size_t offset, std::size_t length);
/// Row r of a matrix, as a vector.
Var row(Var matrix, std::size_t r);
/// Stacks equal-length vectors into a matrix, one per row.
Var stack(std::span<const Var> rows);

// Reductions.
Var sum(Var a);
Var dot(Var a, Var b);
/// e_m = v . tanh(keys[m] + query) for every row m of `keys`.
Var additive_scores(Var keys, Var query, Var v);

/// softmax(scale * x), computed with max subtraction.
Var softmax(Var x, double scale = 1.0);
/// Softmax over positions where visible[i] is true; hidden positions get 0.
Var masked_softmax(Var x, double scale, const std::vector<bool>& visible);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-6);
/// -log softmax(logits)[target]
Var cross_entropy(Var logits, std::size_t target);

}  // namespace rgse::ad
