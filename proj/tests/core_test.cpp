#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "oracle.hpp"
#include "polyfree/core.hpp"
#include "polyfree/objectives.hpp"
#include "polyfree/optimizers.hpp"

namespace polyfree {
namespace {

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_trace(const RunResult& a, const RunResult& b) {
  if (a.trace.size() != b.trace.size() || a.status != b.status) return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    const IterateRecord& r = a.trace[i];
    const IterateRecord& s = b.trace[i];
    if (r.t != s.t || !bitwise_equal(r.f_val, s.f_val) || !bitwise_equal(r.grad_norm, s.grad_norm) ||
        !bitwise_equal(r.stepsize, s.stepsize) ||
        r.dist_to_opt_sq.has_value() != s.dist_to_opt_sq.has_value() ||
        (r.dist_to_opt_sq && !bitwise_equal(*r.dist_to_opt_sq, *s.dist_to_opt_sq))) {
      return false;
    }
  }
  return true;
}

// f(x) = x^2 for x >= 0, NaN otherwise.
class HalfLineObjective final : public Objective {
 public:
  std::size_t dim() const override { return 1; }
  double value(std::span<const double> x) const override {
    return x[0] >= 0 ? x[0] * x[0] : std::numeric_limits<double>::quiet_NaN();
  }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    out[0] = 2 * x[0];
  }
  using Objective::gradient;
};

std::vector<RuleParams> all_rules(double f_star, std::size_t horizon) {
  return {GradientDescent{0.01},          ClippedGradientDescent{0.1, 1.0}, PolyakStep{f_star},
          NaiveLowerBound{f_star - 1.0}, DecSps{f_star - 1.0},           AdaSps{f_star - 1.0},
          InexactPolyak{f_star - 1.0, horizon}};
}

TEST(Run, PolyakOneStepOnIsotropicQuadratic) {
  const Quadratic q = Quadratic::isotropic(2, 1.0, 0.0);
  const RunResult r = run(q, PolyakStep{0.0}, Vector{3.0, 4.0}, 1);
  ASSERT_EQ(r.status, RunStatus::Completed);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].f_val, 12.5);
  EXPECT_EQ(r.trace[0].grad_norm, 5.0);
  EXPECT_EQ(r.trace[0].stepsize, 0.5);
  EXPECT_EQ(r.trace[0].dist_to_opt_sq, 25.0);
  EXPECT_EQ(r.best_x, (Vector{1.5, 2.0}));
  EXPECT_EQ(r.trace[1].f_val, 3.125);
  EXPECT_EQ(r.best_f, 3.125);
  EXPECT_EQ(r.best_index, 1u);
}

TEST(Run, HugeStepOnQuarticDivergesEarly) {
  const QuarticSynthetic f(1.0, 1.0, 1.0);
  const RunResult r = run(f, GradientDescent{1e6}, Vector{5.0}, 50);
  EXPECT_TRUE(diverged(r.status)) << to_string(r.status);
  EXPECT_LE(r.trace.size(), 6u);
  EXPECT_EQ(r.best_f, r.trace[0].f_val);
  for (const IterateRecord& rec : r.trace) EXPECT_TRUE(std::isfinite(rec.f_val));
}

TEST(Run, NonFiniteValueStopsTheRun) {
  const HalfLineObjective f;
  const RunResult r = run(f, GradientDescent{2.0}, Vector{1.0}, 10);
  EXPECT_EQ(r.status, RunStatus::DivergedNonFinite);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].stepsize, 2.0);
}

TEST(Run, DivergenceBoundIsConfigurable) {
  const QuarticSynthetic f(1.0, 1.0, 1.0);
  RunOptions options;
  options.divergence_bound = 10.0;
  const RunResult r = run(f, GradientDescent{1.5}, Vector{5.0}, 10, options);
  EXPECT_EQ(r.status, RunStatus::DivergedBound);
}

TEST(Run, StartingAtTheOptimumStopsAtZero) {
  for (const RuleParams& rule : all_rules(1.0, 20)) {
    const QuarticSynthetic f(1.0, 3.0, 1.0, 2);
    const RunResult r = run(f, rule, Vector{0.0, 0.0}, 20);
    EXPECT_EQ(r.status, RunStatus::StationaryStop) << StepsizeRule(rule).describe();
    EXPECT_EQ(r.best_f, 1.0);
    EXPECT_EQ(r.best_index, 0u);
    ASSERT_EQ(r.trace.size(), 21u);
    for (std::size_t t = 0; t < r.trace.size(); ++t) {
      EXPECT_EQ(r.trace[t].t, t);
      EXPECT_EQ(r.trace[t].stepsize, 0.0);
      EXPECT_EQ(r.trace[t].f_val, 1.0);
    }
  }
}

TEST(Run, StationarityThresholdIsConfigurable) {
  const Quadratic q = Quadratic::isotropic(1, 1.0);
  RunOptions options;
  options.stationarity_threshold = 1e-3;
  const RunResult r = run(q, GradientDescent{0.5}, Vector{1.0}, 100, options);
  EXPECT_EQ(r.status, RunStatus::StationaryStop);
  EXPECT_EQ(r.trace.size(), 101u);
  // 0.5^10 < 1e-3 <= 0.5^9
  EXPECT_EQ(r.best_index, 10u);
}

TEST(Run, RejectsBadInput) {
  const QuarticSynthetic f(1.0, 1.0, 1.0, 2);
  EXPECT_THROW(run(f, GradientDescent{0.1}, Vector{1.0}, 10), std::invalid_argument);
  EXPECT_THROW(run(f, GradientDescent{0.1}, Vector{1.0, 1.0}, 0), std::invalid_argument);
  EXPECT_THROW(run(f, GradientDescent{0.1}, Vector{1.0, std::nan("")}, 5), std::invalid_argument);
}

TEST(Run, IsDeterministic) {
  for (const RuleParams& rule : all_rules(1.0, 300)) {
    const QuarticSynthetic f(1.0, 10.0, 1.0, 3);
    const Vector x0{5.0, -2.0, 0.25};
    EXPECT_TRUE(same_trace(run(f, rule, x0, 300), run(f, rule, x0, 300)))
        << StepsizeRule(rule).describe();
  }
}

// Trace length, ordering, and best-iterate bookkeeping over random problems.
TEST(RunProperty, TraceAndBestIterateInvariants) {
  auto g = oracle::rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const double L1 = oracle::log_uniform(g, 0.5, 500.0);
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const QuarticSynthetic f(oracle::log_uniform(g, 0.1, 10.0), L1, oracle::uniform(g, 0, 2), dim);
    Vector x0(dim);
    for (double& v : x0) v = oracle::uniform(g, -6.0, 6.0);
    const std::size_t T = 1 + static_cast<std::size_t>(oracle::uniform(g, 0, 200));
    const auto rules = all_rules(f.f_star(), T);
    const RunResult r = run(f, rules[static_cast<std::size_t>(trial) % rules.size()], x0, T);

    if (!diverged(r.status)) ASSERT_EQ(r.trace.size(), T + 1);
    ASSERT_LE(r.trace.size(), T + 1);
    double min_f = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t t = 0; t < r.trace.size(); ++t) {
      const IterateRecord& rec = r.trace[t];
      ASSERT_EQ(rec.t, t);
      ASSERT_GE(rec.grad_norm, 0.0);
      ASSERT_GE(rec.stepsize, 0.0);
      ASSERT_TRUE(rec.dist_to_opt_sq.has_value());
      ASSERT_GE(*rec.dist_to_opt_sq, 0.0);
      if (rec.f_val < min_f) {
        min_f = rec.f_val;
        argmin = t;
      }
    }
    EXPECT_EQ(r.best_f, min_f);
    EXPECT_EQ(r.best_index, argmin);
    EXPECT_LE(r.best_f, r.trace[0].f_val);
    EXPECT_EQ(f.value(r.best_x), r.best_f);
  }
}

TEST(RunProperty, BestValueIsNonIncreasingInHorizon) {
  const QuarticSynthetic f(1.0, 10.0, 1.0);
  for (const RuleParams& rule : all_rules(1.0, 100)) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t T = 1; T <= 60; ++T) {
      const RunResult r = run(f, rule, Vector{5.0}, T);
      EXPECT_LE(r.best_f, prev) << StepsizeRule(rule).describe() << " T=" << T;
      prev = r.best_f;
    }
  }
}

TEST(Run, FinalRecordCarriesNextStepsize) {
  const QuarticSynthetic f(1.0, 1.0, 1.0);
  const RunResult r = run(f, PolyakStep{1.0}, Vector{5.0}, 3);
  ASSERT_EQ(r.trace.size(), 4u);
  const IterateRecord& last = r.trace.back();
  EXPECT_DOUBLE_EQ(last.stepsize,
                   (last.f_val - 1.0) / (last.grad_norm * last.grad_norm));
}

}  // namespace
}  // namespace polyfree
