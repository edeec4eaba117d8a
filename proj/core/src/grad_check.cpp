// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "rgse/errors.hpp"
#include "rgse/rng.hpp"

namespace rgse {

namespace {

struct Sample {
  double value;
  std::vector<bool> branches;
};

Sample evaluate(const LossFn& loss_fn, const std::string& perturbed) {
  ad::Tape tape;
  const double value = loss_fn(tape).item();
  if (!std::isfinite(value)) {
    throw NumericError("non-finite loss while perturbing parameter '" + perturbed + "'");
  }
  return {value, tape.branch_pattern()};
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss_fn, ParamStore& store, const GradCheckOptions& options) {
  if (options.eps < 1e-7 || options.eps > 1e-2) throw ArgumentError("grad_check eps must lie in [1e-7, 1e-2]");
  if (options.min_eps <= 0.0 || options.min_eps > options.eps) throw ArgumentError("grad_check min_eps must lie in (0, eps]");

  store.zero_grad();
  {
    ad::Tape tape;
    ad::Var loss = loss_fn(tape);
    if (!std::isfinite(loss.item())) throw NumericError("non-finite loss at unperturbed parameters");
    tape.backward(loss);
  }

  // One entry per tensor first, then uniform draws over all flattened entries.
  std::vector<std::pair<Tensor*, const std::string*>> tensors;
  std::size_t total = 0;
  for (auto& [name, t] : store.entries()) {
    if (t.size() == 0) continue;
    tensors.emplace_back(&t, &name);
    total += t.size();
  }
  Rng rng(options.seed);
  std::set<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t k = 0; k < tensors.size(); ++k) picks.emplace(k, rng.below(tensors[k].first->size()));
  const std::size_t target = std::min(total, std::max(options.samples, tensors.size()));
  while (picks.size() < target) {
    std::uint64_t flat = rng.below(total);
    std::size_t k = 0;
    while (flat >= tensors[k].first->size()) flat -= tensors[k++].first->size();
    picks.emplace(k, static_cast<std::size_t>(flat));
  }

  GradCheckResult result;
  for (const auto& [k, index] : picks) {
    Tensor& t = *tensors[k].first;
    const std::string& name = *tensors[k].second;
    const double analytic = t.has_grad() ? t.grad()[index] : 0.0;
    const double original = t[index];
    const Sample center = evaluate(loss_fn, name);
    std::optional<double> estimate;
    for (double h = options.eps; h >= options.min_eps * (1.0 - 1e-9) && !estimate; h /= 10.0) {
      double f[4];
      bool smooth = true;
      const double offsets[4] = {h, -h, 2.0 * h, -2.0 * h};
      for (int i = 0; i < 4 && smooth; ++i) {
        t[index] = original + offsets[i];
        const Sample s = evaluate(loss_fn, name);
        f[i] = s.value;
        smooth = s.branches == center.branches;
      }
      t[index] = original;
      if (smooth) estimate = (8.0 * (f[0] - f[1]) - (f[2] - f[3])) / (12.0 * h);
    }
    if (!estimate) {
      ++result.skipped_at_kink;
      continue;
    }
    const double numeric = *estimate;
    const double err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    ++result.checked;
    if (result.worst_parameter.empty() || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = name;
      result.worst_index = index;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace rgse
