// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rgse/autodiff.hpp"
#include "rgse/param_store.hpp"

namespace rgse {

/// Builds a scalar loss on the given tape from the current parameter values.
/// Must be deterministic: the checker calls it many times.
using LossFn = std::function<ad::Var(ad::Tape&)>;

struct GradCheckOptions {
  double eps = 1e-3;
  /// When a stencil point lands on another side of a relu kink than the
  /// unperturbed point, the step shrinks tenfold, down to this size.
  double min_eps = 1e-6;
  /// Entries compared; every tensor contributes at least one.
  std::size_t samples = 50;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  /// Entries dropped because every step down to min_eps straddled a kink.
  std::size_t skipped_at_kink = 0;
};

/// Compares tape gradients against the fourth-order central difference
/// (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / (12 h), h = eps, on sampled
/// entries of `store`. Steps that cross a kink (see Tape::branch_pattern)
/// are shrunk until they do not.
/// Relative error is |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const LossFn& loss_fn, ParamStore& store, const GradCheckOptions& options = {});

}  // namespace rgse
