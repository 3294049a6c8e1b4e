#include <gtest/gtest.h>

#include <random>

#include "zpfsim/foundations.hpp"

using namespace zpfsim;
using namespace zpfsim::foundations;

namespace {

std::vector<double> random_row(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> r(k);
  double s = 0.0;
  for (auto& v : r) s += (v = e(rng));
  for (auto& v : r) v /= s;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) acc += r[i];
  r.back() = 1.0 - acc;
  return r;
}

// Random joint model over L lambdas with ka x kb outcomes; entries of the
// joint are either random or 0/1.
DiscreteLhvModel random_model(std::mt19937_64& rng, bool deterministic) {
  std::uniform_int_distribution<std::size_t> L(1, 5), K(2, 3);
  DiscreteLhvModel m;
  m.name = "random";
  m.rho = random_row(rng, L(rng));
  const std::size_t ka = K(rng), kb = K(rng);
  m.measurements = {{"A", std::vector<double>(ka, 0.0)}, {"B", std::vector<double>(kb, 0.0)}};
  JointTable j{0, 1, {}};
  for (std::size_t l = 0; l < m.rho.size(); ++l) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ka), static_cast<Eigen::Index>(kb));
    if (deterministic) {
      t(static_cast<Eigen::Index>(rng() % ka), static_cast<Eigen::Index>(rng() % kb)) = 1.0;
    } else {
      const auto flat = random_row(rng, ka * kb);
      for (std::size_t c = 0; c < flat.size(); ++c)
        t(static_cast<Eigen::Index>(c / kb), static_cast<Eigen::Index>(c % kb)) = flat[c];
    }
    j.p.push_back(t);
  }
  m.joints.push_back(j);
  complete_marginals(m);
  return m;
}

LocalNoise random_noise(std::mt19937_64& rng, std::size_t L, std::size_t ka, std::size_t kb, bool shared) {
  std::uniform_int_distribution<std::size_t> n(1, 4);
  LocalNoise z;
  z.shared = shared;
  z.xi_a = random_row(rng, n(rng));
  z.xi_b = shared ? z.xi_a : random_row(rng, n(rng));
  for (std::size_t l = 0; l < L; ++l) {
    z.a.emplace_back();
    z.b.emplace_back();
    for (std::size_t x = 0; x < z.xi_a.size(); ++x) z.a.back().push_back(rng() % ka);
    for (std::size_t x = 0; x < z.xi_b.size(); ++x) z.b.back().push_back(rng() % kb);
  }
  return z;
}

DiscreteLhvModel bare_pair(std::size_t L) {
  std::vector<double> rho(L, 1.0 / static_cast<double>(L));
  return models::binary_pair("noise", rho);
}

}  // namespace

TEST(Determinism, ZeroOneTableIsDeterministic) {
  auto m = models::binary_pair("det", {0.3, 0.7});
  Eigen::MatrixXd t0(2, 2), t1(2, 2);
  t0 << 1, 0, 0, 0;
  t1 << 0, 0, 1, 0;
  m.joints.push_back({0, 1, {t0, t1}});
  complete_marginals(m);
  EXPECT_TRUE(is_deterministic(m).deterministic);
}

TEST(Determinism, CounterexampleIsNot) {
  const auto r = is_deterministic(models::counterexample());
  ASSERT_FALSE(r.deterministic);
  ASSERT_TRUE(r.first_indeterministic);
  EXPECT_EQ(r.first_indeterministic->lambda, 0u);
  EXPECT_EQ(r.first_indeterministic->measurement, 0u);
  EXPECT_EQ(r.first_indeterministic->outcome, 0u);
  EXPECT_EQ(r.first_indeterministic->value, 0.5);
}

TEST(Determinism, RejectsMalformedModels) {
  auto empty = models::binary_pair("empty", {});
  complete_marginals(empty);
  EXPECT_THROW(is_deterministic(empty), ConfigError);
  auto bad = models::counterexample();
  bad.joints[0].p[0](0, 0) = 0.6;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto neg = models::counterexample();
  neg.response[0][0] = {1.2, -0.2};
  EXPECT_THROW(neg.validate(), ConfigError);
}

TEST(Factorability, CounterexampleHalfVersusQuarter) {
  const auto v = check_ch_factorability(models::counterexample());
  EXPECT_FALSE(v.deterministic_on_lambda);
  EXPECT_FALSE(v.ch_factorable_on_lambda);
  EXPECT_TRUE(v.gamma_factorable);
  ASSERT_EQ(v.witnesses.size(), 4u);
  const auto& w = v.witnesses[0];
  EXPECT_EQ(w.a, 0u);
  EXPECT_EQ(w.b, 0u);
  EXPECT_EQ(w.joint, 0.5);
  EXPECT_EQ(w.product, 0.25);
  EXPECT_EQ(v.worst_violation, 0.25);
}

TEST(Factorability, DeterministicModelsAlwaysFactorise) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_model(rng, true);
    const auto v = check_ch_factorability(m);
    ASSERT_TRUE(v.deterministic_on_lambda);
    ASSERT_TRUE(v.ch_factorable_on_lambda);
    ASSERT_EQ(v.worst_violation, 0.0);
  }
}

TEST(Factorability, WitnessesMatchBooleans) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    const auto m = random_model(rng, i % 2 == 0);
    const auto v = check_ch_factorability(m);
    EXPECT_EQ(v.ch_factorable_on_lambda, v.witnesses.empty());
    for (const auto& w : v.witnesses) {
      EXPECT_DOUBLE_EQ(w.joint, m.joints[0].p[w.lambda](static_cast<Eigen::Index>(w.a), static_cast<Eigen::Index>(w.b)));
      EXPECT_GT(w.violation(), kTolerance);
    }
  }
}

TEST(Augment, DeterministicModelUnchanged) {
  std::mt19937_64 rng(13);
  const auto m = random_model(rng, true);
  const auto aug = augment_to_deterministic(m);
  ASSERT_EQ(aug.origin.size(), m.lambdas());
  for (std::size_t g = 0; g < aug.origin.size(); ++g) {
    EXPECT_EQ(aug.origin[g], g);
    EXPECT_EQ(aug.mu_weight[g], 1.0);
    EXPECT_TRUE(aug.cuts[g].empty());
  }
  EXPECT_EQ(max_table_difference(marginalize(aug, m), m), 0.0);
}

TEST(Augment, CounterexampleTwoPoints) {
  const auto m = models::counterexample();
  const auto aug = augment_to_deterministic(m);
  ASSERT_EQ(aug.mu_weight.size(), 2u);
  EXPECT_EQ(aug.mu_weight[0], 0.5);
  EXPECT_EQ(aug.mu_weight[1], 0.5);
  EXPECT_EQ(aug.model.joints[0].p[0](0, 0), 1.0);  // (+1, +1) under mu1
  EXPECT_EQ(aug.model.joints[0].p[1](1, 1), 1.0);  // (-1, -1) under mu2
  EXPECT_TRUE(is_deterministic(aug.model).deterministic);
  EXPECT_LE(max_table_difference(marginalize(aug, m), m), 1e-12);
}

TEST(Augment, SingleMeasurementThreshold) {
  DiscreteLhvModel m;
  m.name = "biased";
  m.rho = {1.0};
  m.measurements = {{"M", {+1.0, -1.0}}};
  m.response = {{{0.7, 0.3}}};
  const auto aug = augment_to_deterministic(m);
  ASSERT_EQ(aug.cuts[0].size(), 1u);
  EXPECT_DOUBLE_EQ(aug.cuts[0][0], 0.7);
  EXPECT_DOUBLE_EQ(aug.mu_weight[0], 0.7);
  EXPECT_EQ(aug.model.response[0][0][0], 1.0);
  EXPECT_EQ(aug.model.response[0][1][1], 1.0);
}

TEST(Augment, RandomModelsRemarginalizeAndFactorise) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_model(rng, false);
    const auto aug = augment_to_deterministic(m);
    ASSERT_NO_THROW(aug.model.validate());
    ASSERT_TRUE(is_deterministic(aug.model).deterministic);
    ASSERT_LE(max_table_difference(marginalize(aug, m), m), 1e-12);
    ASSERT_TRUE(check_ch_factorability(aug.model).ch_factorable_on_lambda);
  }
}

TEST(LocalNoise, IndependentNoiseGivesFactorableTables) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t L = 1 + rng() % 4;
    const auto m = integrate_local_noise(bare_pair(L), random_noise(rng, L, 2, 2, false));
    const auto v = check_ch_factorability(m);
    ASSERT_TRUE(v.ch_factorable_on_lambda) << "violation " << v.worst_violation;
    ASSERT_LE(v.worst_violation, 1e-12);
  }
}

TEST(LocalNoise, SharedNoiseReproducesCounterexample) {
  LocalNoise z;
  z.shared = true;
  z.xi_a = {0.5, 0.5};
  z.a = {{0, 1}};
  z.b = {{0, 1}};
  const auto m = integrate_local_noise(bare_pair(1), z);
  EXPECT_LE(max_table_difference(m, models::counterexample()), 0.0);
  EXPECT_EQ(check_ch_factorability(m).worst_violation, 0.25);
}

TEST(Classify, GivenIndependentNoise) {
  std::mt19937_64 rng(16);
  const auto z = random_noise(rng, 2, 2, 2, false);
  const auto c = classify_lambda_factorisable(integrate_local_noise(bare_pair(2), z));
  EXPECT_EQ(c.verdict, LambdaClass::Factorisable);
  ASSERT_TRUE(c.construction);
  EXPECT_EQ(c.construction->xi_a, z.xi_a);
}

TEST(Classify, CounterexampleNotLambdaFactorisable) {
  const auto c = classify_lambda_factorisable(models::counterexample());
  EXPECT_EQ(c.verdict, LambdaClass::NonFactorisable);
  ASSERT_TRUE(c.obstruction);
  EXPECT_EQ(c.obstruction->joint, 0.5);
  EXPECT_EQ(c.obstruction->product, 0.25);
  EXPECT_GT(c.assignments_checked, 0u);
}

TEST(Classify, CounterexampleExhaustiveOracle) {
  // Every deterministic assignment over supports of size <= 4, with weights
  // reproducing P(A=+1) = P(B=+1) = 1/2, gives P(A=B=+1) = 1/4.
  std::mt19937_64 rng(17);
  for (std::size_t na = 1; na <= 4; ++na)
    for (std::size_t nb = 1; nb <= 4; ++nb)
      for (unsigned ma = 0; ma < (1u << na); ++ma)
        for (unsigned mb = 0; mb < (1u << nb); ++mb) {
          LocalNoise z;
          z.xi_a = random_row(rng, na);
          z.xi_b = random_row(rng, nb);
          z.a = {{}};
          z.b = {{}};
          for (std::size_t x = 0; x < na; ++x) z.a[0].push_back((ma >> x) & 1u);
          for (std::size_t x = 0; x < nb; ++x) z.b[0].push_back((mb >> x) & 1u);
          const auto m = integrate_local_noise(bare_pair(1), z);
          const double pa = m.response[0][0][0], pb = m.response[1][0][0];
          EXPECT_NEAR(m.joints[0].p[0](0, 0), pa * pb, 1e-15);
          EXPECT_FALSE(std::abs(m.joints[0].p[0](0, 0) - 0.5) < 1e-9 && std::abs(pa - 0.5) < 1e-9 &&
                       std::abs(pb - 0.5) < 1e-9);
        }
}

TEST(Classify, ProductModelViaThresholds) {
  auto m = models::binary_pair("product", {1.0});
  Eigen::MatrixXd t(2, 2);
  t << 0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4;
  m.joints.push_back({0, 1, {t}});
  complete_marginals(m);
  const auto c = classify_lambda_factorisable(m);
  ASSERT_EQ(c.verdict, LambdaClass::Factorisable);
  ASSERT_TRUE(c.construction);
  EXPECT_EQ(c.construction->xi_a.size(), 2u);
  EXPECT_LE(max_table_difference(integrate_local_noise(m, *c.construction), m), 1e-12);
}

TEST(Classify, UndecidedBeyondSupportBound) {
  // Three lambdas with unrelated marginals need more than two noise values.
  auto m = models::binary_pair("spread", {0.2, 0.3, 0.5});
  for (double p : {0.13, 0.41, 0.77}) {
    Eigen::MatrixXd t(2, 2);
    t << p * p, p * (1 - p), (1 - p) * p, (1 - p) * (1 - p);
    m.joints.resize(1);
    m.joints[0].p.push_back(t);
  }
  complete_marginals(m);
  const auto small = classify_lambda_factorisable(m, 2);
  EXPECT_EQ(small.verdict, LambdaClass::Undecided);
  EXPECT_FALSE(small.construction);
  const auto large = classify_lambda_factorisable(m, 4);
  ASSERT_EQ(large.verdict, LambdaClass::Factorisable);
  EXPECT_LE(max_table_difference(integrate_local_noise(m, *large.construction), m), 1e-12);
}

TEST(Classify, SolvedConstructionsReintegrate) {
  std::mt19937_64 rng(18);
  int decided = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t L = 1 + rng() % 3;
    auto m = integrate_local_noise(bare_pair(L), random_noise(rng, L, 2, 2, false));
    m.noise.reset();
    const auto c = classify_lambda_factorisable(m);
    ASSERT_NE(c.verdict, LambdaClass::NonFactorisable);
    if (c.verdict == LambdaClass::Factorisable) {
      ++decided;
      EXPECT_LE(max_table_difference(integrate_local_noise(m, *c.construction), m), 1e-9);
    }
  }
  EXPECT_GT(decided, 100);
}
