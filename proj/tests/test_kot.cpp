#include <gtest/gtest.h>

#include "test_support.hpp"
#include "zpfsim/kot.hpp"

using namespace zpfsim;
using namespace zpfsim::kot;
using zpfsim::testing::within_se;

namespace {

// Eight lambda values of increasing intensity x. Q1 tends to +1 at high x,
// Q2 at low x; detection favors high x through w = gain * (1 - x).
KotModel correlated(double level, double gain = 20.0) {
  KotModel m;
  const std::size_t L = 8;
  Observable q1{"Q1", {+1, -1}, {}, 0.0, 1.0}, q2{"Q2", {+1, -1}, {}, 0.0, -1.0};
  for (std::size_t l = 0; l < L; ++l) {
    const double x = static_cast<double>(l) / (L - 1);
    m.rho.push_back(1.0 / L);
    m.gating_weight.push_back(gain * (1 - x));
    q1.q1_probability.push_back(0.1 + 0.8 * x);
    q2.q1_probability.push_back(0.9 - 0.8 * x);
  }
  m.observables = {q1, q2};
  m.detector.curve.assign(16, level);
  return m;
}

KotModel flat(double level, double w, double p) {
  KotModel m;
  m.rho = {0.25, 0.75};
  m.gating_weight = {w, w};
  m.observables = {{"Q", {+1, -1}, {p, p}, 0.0, 1.0}};
  m.detector.curve.assign(10, level);
  return m;
}

RunOptions opts(std::uint64_t n, std::uint64_t seed = 3) {
  RunOptions o;
  o.trials = n;
  o.seed = seed;
  o.threads = 4;
  return o;
}

}  // namespace

TEST(GatedExperiment, FullDetectionDetectsEveryTrial) {
  const auto m = correlated(1.0);
  const auto log = run_gated_experiment(m, opts(20000));
  for (const auto& r : log) {
    ASSERT_TRUE(r.outcome.has_value());
    ASSERT_TRUE(r.t.has_value());
    ASSERT_GE(*r.t, 0.0);
    ASSERT_LT(*r.t, m.detector.window);
  }
}

TEST(GatedExperiment, HalfRateDetectsHalf) {
  const auto m = flat(0.5, 0.0, 0.5);
  const auto f = detected_fraction(run_gated_experiment(m, opts(200000)), m);
  EXPECT_TRUE(within_se(f.fraction, 0.5, f.se));
  EXPECT_DOUBLE_EQ(f.expected, 0.5);
}

TEST(GatedExperiment, AccumulatedProbabilityMatchesDetectedFraction) {
  auto m = correlated(0.0, 3.0);
  for (std::size_t k = 0; k < m.detector.curve.size(); ++k) m.detector.curve[k] = 0.3 + 0.04 * static_cast<double>(k);
  const auto f = detected_fraction(run_gated_experiment(m, opts(400000)), m);
  EXPECT_TRUE(within_se(f.fraction, f.expected, f.se)) << f.fraction << " vs " << f.expected;
}

TEST(GatedExperiment, OutcomesFollowTimeStampAtFullDetection) {
  auto m = flat(1.0, 0.0, 0.5);
  m.observables[0].time_modulation = 0.8;
  const auto log = run_gated_experiment(m, opts(200000));
  zpfsim::testing::MeanSe early, late;
  for (const auto& r : log) {
    ASSERT_TRUE(r.outcome);
    (*r.t < 0.5 ? early : late).add(*r.outcome);
  }
  EXPECT_GT(late.mean() - early.mean(), 10 * std::hypot(early.se(), late.se()));
}

TEST(GatedExperiment, ThreadCountDoesNotChangeLog) {
  const auto m = correlated(0.9);
  auto o = opts(30000);
  o.threads = 1;
  const auto a = run_gated_experiment(m, o);
  o.threads = 5;
  const auto b = run_gated_experiment(m, o);
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].lambda, b[k].lambda);
    ASSERT_EQ(a[k].t, b[k].t);
    ASSERT_EQ(a[k].outcome, b[k].outcome);
  }
}

TEST(GatedExperiment, RejectsBadInput) {
  EXPECT_THROW(run_gated_experiment(correlated(0.9), opts(0)), ConfigError);
  auto m = correlated(0.9);
  m.detector.curve[3] = 1.2;
  EXPECT_THROW(run_gated_experiment(m, opts(10)), ConfigError);
  auto never = flat(0.0, 1.0, 0.5);
  const auto log = run_gated_experiment(never, opts(100));
  EXPECT_THROW(estimate_beta(log, never, BetaConvention::ObservedSubsets), UndefinedEstimate);
  EXPECT_NO_THROW(estimate_beta(log, never, BetaConvention::FullEnsembleOracle));
}

TEST(EstimateBeta, FullDetectionIsUnbiased) {
  const auto m = correlated(1.0);
  const auto b = estimate_bias(run_gated_experiment(m, opts(400000)), m);
  EXPECT_TRUE(within_se(b.bias, 0.0, b.se)) << b.bias << " se " << b.se;
}

TEST(EstimateBeta, CorrelatedGatingIsBiased) {
  const auto m = correlated(0.9);
  const auto log = run_gated_experiment(m, opts(400000));
  const auto b = estimate_bias(log, m);
  EXPECT_GT(b.sigma(), 5.0);
  // Both conventions agree with their exact counterparts.
  const auto obs = estimate_beta(log, m, BetaConvention::ObservedSubsets);
  const auto orc = estimate_beta(log, m, BetaConvention::FullEnsembleOracle);
  EXPECT_TRUE(within_se(obs.beta, exact_observed_beta(m), obs.se));
  EXPECT_TRUE(within_se(orc.beta, exact_beta(m), orc.se));
  EXPECT_NEAR(b.bias, exact_observed_beta(m) - exact_beta(m), 4 * b.se);
}

TEST(EstimateBeta, LambdaIndependentOutcomesUnbiased) {
  for (double level : {0.2, 0.6, 0.9}) {
    auto m = correlated(level);
    for (auto& o : m.observables) std::fill(o.q1_probability.begin(), o.q1_probability.end(), 0.3);
    const auto b = estimate_bias(run_gated_experiment(m, opts(200000)), m);
    EXPECT_TRUE(within_se(b.bias, 0.0, b.se)) << level;
  }
}

TEST(EstimateBeta, BiasShrinksTowardFullDetection) {
  const auto sweep = bias_sweep(correlated(0.9), {0.9, 0.99, 1.0}, opts(1000000));
  ASSERT_EQ(sweep.size(), 3u);
  EXPECT_GT(sweep[0].bias.sigma(), 5.0);
  EXPECT_GT(std::abs(sweep[0].bias.bias), std::abs(sweep[1].bias.bias));
  EXPECT_GT(std::abs(sweep[1].bias.bias), std::abs(sweep[2].bias.bias));
  EXPECT_LE(sweep[2].bias.sigma(), 4.0);
}

TEST(SubsetSignificance, FullDetectionHasZeroDistance) {
  const auto m = correlated(1.0);
  for (const auto& d : subset_significance_report(run_gated_experiment(m, opts(50000)), m, 1)) {
    EXPECT_EQ(d.tv, 0.0);
    EXPECT_EQ(d.detected, d.trials);
  }
}

TEST(SubsetSignificance, IntensityDependentDetectionIsSignificant) {
  const auto m = correlated(0.9);
  for (const auto& d : subset_significance_report(run_gated_experiment(m, opts(200000)), m, 1))
    EXPECT_GT(d.tv, 5 * d.se) << d.observable;
}

TEST(SubsetSignificance, IdenticalGatingGivesEqualDistances) {
  auto m = correlated(0.7, 0.0);
  const auto r = subset_significance_report(run_gated_experiment(m, opts(200000)), m, 1);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LE(std::abs(r[0].tv - r[1].tv), 4 * std::hypot(r[0].se, r[1].se));
  EXPECT_GT(r[0].se, 0.0);
}

TEST(KotModel, MinRateMapping) {
  auto m = correlated(0.0);
  for (std::size_t k = 0; k < m.detector.curve.size(); ++k) m.detector.curve[k] = 0.5 + 0.02 * static_cast<double>(k);
  const auto n = m.with_min_rate(0.9);
  EXPECT_DOUBLE_EQ(n.detector.min_rate(), 0.9);
  for (double v : m.with_min_rate(1.0).detector.curve) EXPECT_DOUBLE_EQ(v, 1.0);
  for (std::size_t k = 1; k < n.detector.curve.size(); ++k) EXPECT_GT(n.detector.curve[k], n.detector.curve[k - 1]);
  for (double v : correlated(1.0).with_min_rate(0.4).detector.curve) EXPECT_DOUBLE_EQ(v, 0.4);
}
