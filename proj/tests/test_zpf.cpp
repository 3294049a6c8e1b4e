#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"
#include "zpfsim/parallel.hpp"
#include "zpfsim/zpf.hpp"

using namespace zpfsim;
using namespace zpfsim::zpf;
using zpfsim::testing::MeanSe;

TEST(SampleVacuum, MeanAndVarianceWithinThreeSigma) {
  const std::size_t n = 1000000;
  VacuumSampler sampler({1, 0.25}, 2024);
  MeanSe mean, var;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = sampler(k).amplitudes[0].real();
    mean.add(x);
    var.add(x * x);
  }
  // Mean: SE = sqrt(0.25/N). Variance: Var(x^2) = 2 sigma^4, SE = sqrt(2/N) * 0.25.
  const double se_mean = std::sqrt(0.25 / n);
  const double se_var = std::sqrt(2.0 / n) * 0.25;
  EXPECT_LE(std::abs(mean.mean()), 3 * se_mean);
  EXPECT_LE(std::abs(var.mean() - mean.mean() * mean.mean() - 0.25), 3 * se_var);
}

TEST(SampleVacuum, ZeroCountRejected) {
  EXPECT_THROW(sample_vacuum({1, 0.25}, 1, 0), ConfigError);
}

TEST(SampleVacuum, NonPositiveVarianceRejected) {
  EXPECT_THROW(sample_vacuum({1, 0.0}, 1, 1), ConfigError);
  EXPECT_THROW(sample_vacuum({1, -1.0}, 1, 1), ConfigError);
}

TEST(SampleVacuum, BitReproducible) {
  const auto a = sample_vacuum({5, 0.25}, 77, 100);
  const auto b = sample_vacuum({5, 0.25}, 77, 100);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].amplitudes, b[k].amplitudes);
  // Sample k does not depend on how many samples precede it.
  VacuumSampler s({5, 0.25}, 77);
  EXPECT_EQ(s(63).amplitudes, a[63].amplitudes);
}

TEST(SampleVacuum, ThreadCountInvariant) {
  VacuumSampler s({3, 0.25}, 5);
  const std::size_t n = 50000;
  auto collect = [&](unsigned threads) {
    std::vector<Amplitude> out(n * 3);
    parallel::for_each_block(n, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) s.fill(k, std::span(out).subspan(3 * k, 3));
    });
    return out;
  };
  EXPECT_EQ(collect(1), collect(5));
}

TEST(WignerDensity, OriginValue) {
  VacuumSample zero{{Amplitude{}}};
  EXPECT_NEAR(wigner_density({1, 0.25}, zero), 1.0 / (2 * std::numbers::pi * 0.25), 1e-15);
  EXPECT_NEAR(wigner_density({1, 0.25}, zero), 0.63661977236758, 1e-12);
}

TEST(WignerDensity, PositiveOnFiniteSamples) {
  VacuumSampler s({4, 0.25}, 3);
  for (std::size_t k = 0; k < 10000; ++k) EXPECT_GT(wigner_density({4, 0.25}, s(k)), 0.0);
  VacuumSample far{{Amplitude(3.0, -3.0)}};
  EXPECT_GT(wigner_density({1, 0.25}, far), 0.0);
  EXPECT_TRUE(std::isfinite(log_wigner_density({1, 0.25}, VacuumSample{{Amplitude(1e3, 0)}})));
}

TEST(WignerDensity, IntegratesToOne) {
  const double h = 0.005, lim = 5.0;
  double total = 0.0;
  for (double x = -lim + h / 2; x < lim; x += h)
    for (double y = -lim + h / 2; y < lim; y += h)
      total += wigner_density({1, 0.25}, VacuumSample{{Amplitude(x, y)}});
  EXPECT_NEAR(total * h * h, 1.0, 1e-6);
}

TEST(WignerDensity, DimensionMismatch) {
  EXPECT_THROW(wigner_density({2, 0.25}, VacuumSample{{Amplitude{}}}), ContractViolation);
}

TEST(GaussianMoment, Examples) {
  Eigen::MatrixXd one(1, 1);
  one << 0.25;
  EXPECT_DOUBLE_EQ(gaussian_moment({one, {0, 0}}), 0.25);
  EXPECT_DOUBLE_EQ(gaussian_moment({one, {0, 0, 0, 0}}), 0.1875);
  Eigen::MatrixXd two = 0.25 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ(gaussian_moment({two, {0, 0, 1, 1}}), 0.0625);
}

TEST(GaussianMoment, OddOrderAndLimits) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(gaussian_moment({c, {0}}), 0.0);
  EXPECT_EQ(gaussian_moment({c, {0, 1, 1}}), 0.0);
  // x^8 for unit variance is 7!! = 105.
  EXPECT_DOUBLE_EQ(gaussian_moment({c, {0, 0, 0, 0, 0, 0, 0, 0}}), 105.0);
  EXPECT_THROW(gaussian_moment({c, std::vector<int>(10, 0)}), UnsupportedError);
  EXPECT_THROW(gaussian_moment({c, {0, 2}}), ContractViolation);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;  // indefinite
  EXPECT_THROW(gaussian_moment({bad, {0, 0}}), ContractViolation);
}

TEST(GaussianMoment, CorrelatedPairAgainstClosedForm) {
  // E[x^2 y^2] = s_xx s_yy + 2 s_xy^2 for a zero-mean pair.
  Eigen::MatrixXd c(2, 2);
  c << 0.7, 0.3, 0.3, 0.5;
  EXPECT_NEAR(gaussian_moment({c, {0, 0, 1, 1}}), 0.7 * 0.5 + 2 * 0.09, 1e-15);
  EXPECT_NEAR(gaussian_moment({c, {0, 1}}), 0.3, 1e-15);
  EXPECT_NEAR(gaussian_moment({c, {0, 0, 0, 1}}), 3 * 0.7 * 0.3, 1e-15);
}

// Sampler against oracle for a correlated covariance reached by a linear map
// of the vacuum: x = L z with z ~ vacuum quadratures.
TEST(GaussianMoment, AgreesWithSamplerUpToOrderFour) {
  Eigen::MatrixXd L(3, 4);
  L << 1.0, 0.4, 0.0, -0.2,
       0.3, 1.1, 0.5, 0.0,
       0.0, -0.6, 0.2, 0.9;
  const Eigen::MatrixXd cov = 0.25 * L * L.transpose();
  const std::vector<std::vector<int>> monomials = {
      {0, 0}, {0, 1}, {1, 2}, {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 1, 2, 2}, {1, 1, 1, 2}, {0, 1, 1, 2}};
  std::vector<MeanSe> acc(monomials.size());
  VacuumSampler s({2, 0.25}, 99);
  const std::size_t n = 1000000;
  std::vector<Amplitude> a(2);
  for (std::size_t k = 0; k < n; ++k) {
    s.fill(k, a);
    Eigen::Vector4d z(a[0].real(), a[0].imag(), a[1].real(), a[1].imag());
    const Eigen::Vector3d x = L * z;
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      double v = 1.0;
      for (int q : monomials[i]) v *= x(q);
      acc[i].add(v);
    }
  }
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const double oracle = gaussian_moment({cov, monomials[i]});
    EXPECT_TRUE(zpfsim::testing::within_se(acc[i].mean(), oracle, acc[i].se()))
        << "monomial " << i << ": mc " << acc[i].mean() << " oracle " << oracle;
  }
}
