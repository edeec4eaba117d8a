// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/optimizer.hpp"

#include <cmath>

#include "rgse/errors.hpp"

namespace rgse {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate >= 0.0)) throw ArgumentError("learning rate must be non-negative");
}

void Optimizer::step(ParamStore& store) {
  for (const auto& [name, t] : store.entries()) {
    if (!t.has_grad()) throw StateError("parameter '" + name + "' has no gradient");
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::sgd) {
    for (auto& [name, t] : store.entries()) {
      auto g = t.grad();
      auto p = t.data();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
      t.zero_grad();
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (auto& [name, t] : store.entries()) {
    auto& m = moments_[name];
    if (m.first.size() != t.size()) {
      m.first.assign(t.size(), 0.0);
      m.second.assign(t.size(), 0.0);
    }
    auto g = t.grad();
    auto p = t.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.first[i] = b1 * m.first[i] + (1.0 - b1) * g[i];
      m.second[i] = b2 * m.second[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m.first[i] / c1;
      const double v_hat = m.second[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    t.zero_grad();
  }
}

double clip_grad_norm(ParamStore& store, double max_norm) {
  const double norm = store.grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& [_, t] : store.entries()) {
      if (!t.has_grad()) continue;
      for (double& g : t.grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace rgse
