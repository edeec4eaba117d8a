// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rgse/errors.hpp"
#include "rgse/grad_check.hpp"

namespace rgse {
namespace {

TEST(GradCheck, SumOfSquares) {
  ParamStore s(3);
  auto& w = s.add("w", {2, 2}, Init::uniform_fan_in);
  const auto result = grad_check([&](ad::Tape& t) {
    auto v = t.param(w);
    return ad::sum(ad::mul(v, v));
  }, s, {1e-5, 1e-6, 50, 0});
  EXPECT_LT(result.max_relative_error, 1e-6);
  EXPECT_EQ(result.checked, 4u);
}

TEST(GradCheck, ConstantInParameterStaysBelowFloor) {
  ParamStore s(3);
  auto& w = s.add("w", {3}, Init::uniform_fan_in);
  auto& unused = s.add("unused", {2}, Init::uniform_fan_in);
  const auto result = grad_check([&](ad::Tape& t) {
    t.param(unused);
    return ad::sum(ad::tanh(t.param(w)));
  }, s);
  EXPECT_LT(result.max_relative_error, 1e-6);
}

TEST(GradCheck, DetectsWrongBackwardRule) {
  ParamStore s(3);
  auto& w = s.add("w", {3}, Init::ones);
  // y = x^2 with a backward rule that forgets the factor 2.
  auto bad_square = [](ad::Var x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * x[i];
    const std::size_t xi = x.id();
    return x.tape().record(x.shape(), out, {x}, [xi](ad::Tape& t, std::size_t self) {
      auto g = t.grad_of(self);
      auto gx = t.grad_of(xi);
      auto xv = t.value_of(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * xv[i];
    });
  };
  const auto result = grad_check([&](ad::Tape& t) { return ad::sum(bad_square(t.param(w))); }, s);
  EXPECT_GT(result.max_relative_error, 0.3);
  EXPECT_EQ(result.worst_parameter, "w");
}

TEST(GradCheck, StepShrinksAwayFromReluKink) {
  ParamStore s(3);
  auto& w = s.add("w", {1}, Init::zeros);
  w[0] = 2e-4;  // inside the default stencil, outside a ten-times smaller one
  const auto result = grad_check([&](ad::Tape& t) { return ad::sum(ad::relu(t.param(w))); }, s);
  EXPECT_LT(result.max_relative_error, 1e-8);
  EXPECT_EQ(result.skipped_at_kink, 0u);
}

TEST(GradCheck, EntryOnKinkIsSkipped) {
  ParamStore s(3);
  auto& w = s.add("w", {1}, Init::zeros);
  const auto result = grad_check([&](ad::Tape& t) { return ad::sum(ad::relu(t.param(w))); }, s);
  EXPECT_EQ(result.skipped_at_kink, 1u);
}

TEST(GradCheck, NonFiniteLossNamesParameter) {
  ParamStore s(3);
  auto& w = s.add("w", {1}, Init::zeros);
  auto& v = s.add("v", {1}, Init::ones);
  try {
    grad_check([&](ad::Tape& t) {
      auto x = t.param(w);
      t.param(v);
      const double bad = x[0] > 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
      return ad::add(ad::sum(x), t.scalar(bad));
    }, s);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos) << e.what();
  }
}

TEST(GradCheck, RejectsStepOutsideRange) {
  ParamStore s(3);
  s.add("w", {1}, Init::zeros);
  auto fn = [&](ad::Tape& t) { return ad::sum(t.param(s.at("w"))); };
  EXPECT_THROW(grad_check(fn, s, {1e-9, 1e-9, 1, 0}), ArgumentError);
  EXPECT_THROW(grad_check(fn, s, {1e-3, 1e-2, 1, 0}), ArgumentError);
}

}  // namespace
}  // namespace rgse
