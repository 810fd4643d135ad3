#include "tmaf/stepfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tmaf/error.hpp"
#include "tmaf/rng.hpp"

namespace tmaf {
namespace {

std::vector<double> three_points() { return {-1.0, 0.0, 1.0}; }

TEST(Locate, IntervalsAreClosedOnTheRight) {
  const auto f = StepFunction::constant(three_points(), 0.0);
  EXPECT_EQ(f.locate(-1.0).j, 0u);
  EXPECT_EQ(f.locate(-0.5).j, 1u);
  EXPECT_EQ(f.locate(0.0).j, 1u);
  EXPECT_EQ(f.locate(1e-12).j, 2u);
  EXPECT_EQ(f.locate(1.0).j, 2u);
  EXPECT_EQ(f.locate(1.0000001).j, 3u);
  EXPECT_EQ(f.locate(-std::numeric_limits<double>::infinity()).j, 0u);
  EXPECT_EQ(f.locate(std::numeric_limits<double>::infinity()).j, 3u);
}

TEST(Locate, DecileBreakpoints) {
  const auto f = StepFunction::constant(gaussian_decile_breakpoints(), 0.0);
  EXPECT_EQ(f.locate(0.3).j, 6u);
  EXPECT_EQ(f.locate(0.0).j, 4u);
  EXPECT_EQ(f.locate(-1.5).j, 0u);
  EXPECT_EQ(f.locate(2.0).j, 9u);
}

TEST(Locate, ZeroBreakpointWithReluValues) {
  const auto f = StepFunction({0.0}, {0.0, 1.0});
  EXPECT_EQ(f.locate(std::numeric_limits<double>::denorm_min()).j, 1u);
  EXPECT_EQ(f.locate(0.0).j, 0u);
  EXPECT_EQ(f.locate(-0.0).j, 0u);
}

TEST(Locate, AgreesWithLinearScan) {
  Rng rng(2024);
  std::vector<std::vector<double>> sets = {
      gaussian_decile_breakpoints(), uniform_grid_breakpoints(-1, 1, 100),
      uniform_grid_breakpoints(-2.01, -0.01, 100), uniform_grid_breakpoints(0.01, 2.01, 100),
      uniform_grid_breakpoints(-3, 5, 7)};
  for (int r = 0; r < 5; ++r) {
    std::vector<double> bp(1 + rng.below(40));
    for (double& b : bp) b = rng.uniform(-3, 3);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    sets.push_back(bp);
  }
  for (const auto& bp : sets) {
    const auto f = StepFunction::constant(bp, 0.0);
    for (int i = 0; i < 10000; ++i) {
      double s = rng.uniform(-3.5, 3.5);
      // Hit breakpoints exactly and their neighbours now and then.
      if (i % 7 == 0) s = bp[rng.below(bp.size())];
      if (i % 11 == 0) s = std::nextafter(bp[rng.below(bp.size())], i % 2 ? 10.0 : -10.0);
      ASSERT_EQ(f.locate(s).j, oracle::linear_locate(bp, s)) << "s=" << s;
    }
  }
}

TEST(Eval, HandValues) {
  const StepFunction relu({0.0}, {0.0, 1.0});
  EXPECT_EQ(relu.eval(-2.0) * -2.0, 0.0);
  EXPECT_EQ(relu.eval(3.0) * 3.0, 3.0);
  const StepFunction g = StepFunction::constant(three_points(), 0.25);
  EXPECT_EQ(g.eval(-5.0) * -5.0, -1.25);
}

TEST(Eval, ReluLikeMatchesRelu) {
  Rng rng(1);
  for (const auto& bp : {gaussian_decile_breakpoints(), uniform_grid_breakpoints(-1, 1, 100)}) {
    const auto f = StepFunction::relu_like(bp);
    for (int i = 0; i < 2000; ++i) {
      const double s = rng.uniform(-3, 3);
      EXPECT_EQ(f.eval(s) * s + 0.0, std::max(s, 0.0));
    }
    EXPECT_EQ(f.eval(0.0), 0.0);
  }
}

TEST(Eval, ReluLikeInitialValues) {
  const auto f = StepFunction::relu_like(gaussian_decile_breakpoints());
  const std::vector<double> want{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  EXPECT_EQ(std::vector<double>(f.values().begin(), f.values().end()), want);
}

TEST(ValueGrad, OnlyTheActiveIntervalMoves) {
  StepFunction f({0.0}, {0.0, 1.0});
  f.accumulate_value_grad(2.0, 1.0);
  EXPECT_EQ(f.value_grads()[0], 0.0);
  EXPECT_EQ(f.value_grads()[1], 2.0);

  StepFunction g = StepFunction::constant(three_points(), 0.0);
  g.accumulate_value_grad(-0.5, 3.0);
  EXPECT_EQ(g.value_grads()[1], -1.5);
  EXPECT_EQ(g.value_grads()[0] + g.value_grads()[2] + g.value_grads()[3], 0.0);
}

TEST(ValueGrad, MatchesFiniteDifferences) {
  Rng rng(77);
  StepFunction f = StepFunction::constant(gaussian_decile_breakpoints(), 0.0);
  for (double& v : f.values()) v = rng.uniform(-1, 1);
  std::vector<double> s(64), u(64);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform(-2, 2);
    u[i] = rng.uniform(-1, 1);
  }
  for (std::size_t i = 0; i < s.size(); ++i) f.accumulate_value_grad(s[i], u[i]);
  // L(values) = sum_i u_i * f(s_i) * s_i is linear in the values.
  auto loss = [&](const StepFunction& g) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += u[i] * oracle::step_value(g, s[i]) * s[i];
    return total;
  };
  for (std::size_t j = 0; j < f.interval_count(); ++j) {
    StepFunction probe = f;
    const double base = probe.values()[j];
    const double numeric = oracle::central_difference(
        [&](double v) {
          probe.values()[j] = v;
          return loss(probe);
        },
        base, 1e-5);
    EXPECT_LE(oracle::rel_error(f.value_grads()[j], numeric, 1e-8), 1e-9) << "interval " << j;
  }
  f.zero_grads();
  for (double g : f.value_grads()) EXPECT_EQ(g, 0.0);
}

TEST(DistanceToBreakpoint, NearestPoint) {
  const auto f = StepFunction::constant(three_points(), 0.0);
  EXPECT_DOUBLE_EQ(f.distance_to_breakpoint(0.3), 0.3);
  EXPECT_DOUBLE_EQ(f.distance_to_breakpoint(-0.9), 0.1);
  EXPECT_DOUBLE_EQ(f.distance_to_breakpoint(4.0), 3.0);
}

TEST(Breakpoints, GaussianDeciles) {
  const std::vector<double> want{-1.4, -0.92, -0.56, -0.26, 0, 0.26, 0.56, 0.92, 1.4};
  const auto bp = gaussian_decile_breakpoints();
  EXPECT_EQ(bp, want);
  for (std::size_t i = 0; i < bp.size(); ++i) {
    EXPECT_EQ(bp[i], -bp[bp.size() - 1 - i]);
    // Rounded deciles: the standard normal CDF lands within 0.025 of (i + 1) / 10.
    const double cdf = 0.5 * std::erfc(-bp[i] / std::sqrt(2.0));
    EXPECT_NEAR(cdf, (i + 1) / 10.0, 0.025) << bp[i];
  }
}

TEST(Breakpoints, UniformGrid) {
  const auto g = uniform_grid_breakpoints(-1, 1, 100);
  ASSERT_EQ(g.size(), 101u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_DOUBLE_EQ(g[1], -0.98);
  EXPECT_EQ(g[50], 0.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(uniform_grid_breakpoints(0, 1, 1), (std::vector<double>{0.0, 1.0}));

  const auto beta = uniform_grid_breakpoints(-2.01, -0.01, 100);
  EXPECT_EQ(beta.front(), -2.01);
  EXPECT_EQ(beta.back(), -0.01);
  EXPECT_DOUBLE_EQ(beta[1], -1.99);
  const auto gamma = uniform_grid_breakpoints(0.01, 2.01, 100);
  EXPECT_EQ(gamma.front(), 0.01);
  EXPECT_EQ(gamma.back(), 2.01);
}

TEST(Breakpoints, GridRejectsBadArguments) {
  EXPECT_THROW(uniform_grid_breakpoints(1, 1, 10), ConfigError);
  EXPECT_THROW(uniform_grid_breakpoints(2, 1, 10), ConfigError);
  EXPECT_THROW(uniform_grid_breakpoints(0, 1, 0), ConfigError);
}

TEST(StepFunction, RejectsMalformedInput) {
  EXPECT_THROW(StepFunction({0.0, 0.0}, {1, 2, 3}), Error);
  EXPECT_THROW(StepFunction({1.0, 0.0}, {1, 2, 3}), Error);
  EXPECT_THROW(StepFunction({0.0, 1.0}, {1, 2}), Error);
  EXPECT_THROW(StepFunction({0.0, std::nan("")}, {1, 2, 3}), Error);
  EXPECT_THROW(StepFunction({0.0}, {1, std::numeric_limits<double>::infinity()}), Error);
}

}  // namespace
}  // namespace tmaf
