// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rgse::tools {

/// Outcome of one named check. `observed` is compared against `limit`
/// (error checks) or is 1/0 for pass/fail checks.
struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double limit = 0.0;
  std::string detail;
};

enum class Suite { grad, oracle, invariant, all };

/// Throws ArgumentError for anything but grad, oracle, invariant or all.
Suite parse_suite(std::string_view name);

/// Finite-difference checks of every layer and both full models
/// ("grad.<component>[.<variant>.<phi>.<tau>]"), max relative error < 1e-4.
std::vector<CheckResult> grad_suite();

/// Library output against the straight-line oracles ("oracle.*"), including
/// the BLEU counting oracle ("oracle.bleu.*").
std::vector<CheckResult> oracle_suite();

/// Structural equivalences ("equiv.*"), order sensitivity ("order.*"),
/// GCN equivariance and the fixed BLEU cases ("bleu.*").
std::vector<CheckResult> invariant_suite();

std::vector<CheckResult> run_suite(Suite suite);

/// One "PASS name ..." / "FAIL name ..." line per check.
void print_results(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace rgse::tools
