#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "test_support.hpp"
#include "zpfsim/bell.hpp"

using namespace zpfsim;
using namespace zpfsim::bell;
using zpfsim::testing::within_se;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::vector<Setting> kChshSettings = {
    {0.0, 22.5 * kDeg}, {0.0, -22.5 * kDeg}, {45.0 * kDeg, 22.5 * kDeg}, {45.0 * kDeg, -22.5 * kDeg}};

// Ideal singlet statistics with independent losses of efficiency eta.
BellTable ideal_singlet(double eta) {
  BellTable t;
  for (std::size_t s = 0; s < 4; ++s) {
    const double E = -std::cos(2 * (kChshSettings[s].phi_a - kChshSettings[s].phi_b));
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const double sign = (x == y) ? 1.0 : -1.0;
        t.p[s][cell(x, y)] = eta * eta * (1 + sign * E) / 4;
      }
    for (int x = 0; x < 2; ++x) {
      t.p[s][cell(x, kNone)] = eta * (1 - eta) / 2;
      t.p[s][cell(kNone, x)] = eta * (1 - eta) / 2;
    }
    t.p[s][cell(kNone, kNone)] = (1 - eta) * (1 - eta);
    t.tol[s].fill(kLpTolerance);
  }
  return t;
}

ResponseSet constant_responses(std::size_t ports, double f, double gamma,
                               const optics::OpticalNetwork& net) {
  ResponseSet r;
  r.marginal.assign(ports, synth::ResponseFunction::constant(f));
  const auto layout = SideLayout::of(net);
  for (const auto& a : layout.a)
    for (const auto& b : layout.b)
      if (a && b) r.joint[{*a, *b}] = synth::JointResponse::constant(gamma);
  return r;
}

SettingCounts counts_with(const std::array<std::uint64_t, 9>& t) {
  SettingCounts sc;
  sc.table = t;
  for (auto v : t) sc.trials += v;
  return sc;
}

}  // namespace

TEST(Lhv, IdealSingletFullEfficiencyIsInfeasible) {
  const auto cert = lhv_feasible(ideal_singlet(1.0));
  EXPECT_FALSE(cert.feasible);
  EXPECT_GT(cert.required_scale, 1.0);
  // The dual functional separates the table from every local strategy.
  const Eigen::MatrixXd D = strategy_matrix();
  double tol_norm = 0.0;
  for (double z : cert.functional) tol_norm += std::abs(z) * kLpTolerance;
  for (Eigen::Index s = 0; s < D.cols(); ++s) {
    double v = 0.0;
    for (Eigen::Index k = 0; k < 36; ++k) v += cert.functional[static_cast<std::size_t>(k)] * D(k, s);
    EXPECT_LE(v, cert.local_bound + 1e-12);
  }
  EXPECT_GT(cert.observed_value - cert.local_bound, tol_norm);
}

TEST(Lhv, IdealSingletHalfEfficiencyIsFeasible) {
  const auto table = ideal_singlet(0.5);
  const auto cert = lhv_feasible(table);
  ASSERT_TRUE(cert.feasible);
  const Eigen::MatrixXd D = strategy_matrix();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(D.cols());
  double total = 0.0;
  for (auto [s, w] : cert.mixture) {
    x(static_cast<Eigen::Index>(s)) = w;
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  const Eigen::VectorXd reproduced = D * x;
  for (Eigen::Index k = 0; k < 36; ++k)
    EXPECT_NEAR(reproduced(k), table.p[static_cast<std::size_t>(k / 9)][static_cast<std::size_t>(k % 9)], 1e-6);
}

TEST(Lhv, AboveCriticalEfficiencyIsInfeasible) {
  EXPECT_FALSE(lhv_feasible(ideal_singlet(0.9)).feasible);
}

TEST(Lhv, ProductStatisticsFeasible) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<std::array<double, 3>, 2> pa, pb;
    for (auto* side : {&pa, &pb})
      for (auto& row : *side) {
        double a = u(rng), b = u(rng), c = u(rng);
        const double s = a + b + c;
        row = {a / s, b / s, c / s};
      }
    BellTable t;
    for (std::size_t s = 0; s < 4; ++s) {
      for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) t.p[s][cell(x, y)] = pa[s / 2][static_cast<std::size_t>(x)] * pb[s % 2][static_cast<std::size_t>(y)];
      t.tol[s].fill(kLpTolerance);
    }
    EXPECT_TRUE(lhv_feasible(t).feasible);
  }
}

TEST(Lhv, SignalingInputRejected) {
  auto t = ideal_singlet(0.5);
  // Move weight on side a between outcomes only under setting (a, b').
  t.p[1][cell(kPlus, kNone)] += 0.1;
  t.p[1][cell(kMinus, kNone)] -= 0.1;
  EXPECT_THROW(lhv_feasible(t), ConfigError);
}

TEST(SimulateCounts, ZeroEfficiencyGivesNoCounts) {
  const auto net = optics::presets::singlet_pbs(0.3);
  SimulationOptions opt;
  opt.trials = 20000;
  const auto runs = simulate_counts(net, {constant_responses(4, 0.3, 0.09, net)},
                                    {{0, 0, 0, 0}}, kChshSettings, opt);
  for (const auto& r : runs) {
    EXPECT_EQ(r.table[cell(kNone, kNone)], opt.trials);
    for (const auto& rec : counts_records(r, SideLayout::of(net), 1.0)) {
      EXPECT_EQ(rec.n_i, 0u);
      EXPECT_EQ(rec.n_ij, 0u);
    }
  }
}

TEST(SimulateCounts, ConstantResponsesGiveBernoulliRates) {
  const auto net = optics::presets::singlet_pbs(0.3);
  SimulationOptions opt;
  opt.trials = 1000000;
  opt.threads = 4;
  const auto runs = simulate_counts(net, {constant_responses(4, 0.3, 0.09, net)},
                                    {{1, 1, 1, 1}}, {{0.2, 0.7}}, opt);
  const double n = static_cast<double>(opt.trials);
  for (const auto& rec : counts_records(runs[0], SideLayout::of(net), 1.0)) {
    const double pi = rec.n_i / n, pij = rec.n_ij / n;
    EXPECT_TRUE(within_se(pi, 0.3, std::sqrt(0.3 * 0.7 / n)));
    EXPECT_TRUE(within_se(pij, 0.09, std::sqrt(0.09 * 0.91 / n)));
  }
}

TEST(SimulateCounts, EfficiencyScalesLinearly) {
  const auto net = optics::presets::singlet_pbs(0.3);
  SimulationOptions opt;
  opt.trials = 400000;
  const auto resp = constant_responses(4, 0.3, 0.09, net);
  const auto lo = simulate_counts(net, {resp}, {{0.4, 0.4, 1, 1}}, {{0.0, 0.0}}, opt);
  const auto hi = simulate_counts(net, {resp}, {{0.8, 0.8, 1, 1}}, {{0.0, 0.0}}, opt);
  const double n = static_cast<double>(opt.trials);
  const double p_lo = lo[0].side_a(kPlus) / n, p_hi = hi[0].side_a(kPlus) / n;
  const double se = std::hypot(2 * std::sqrt(p_lo * (1 - p_lo) / n), std::sqrt(p_hi * (1 - p_hi) / n));
  EXPECT_TRUE(within_se(p_hi, 2 * p_lo, se));
  // Coincidences scale with the product eta_a eta_b.
  const double c_lo = lo[0].table[cell(kPlus, kPlus)] / n, c_hi = hi[0].table[cell(kPlus, kPlus)] / n;
  const double se_c = std::hypot(2 * std::sqrt(c_lo / n), std::sqrt(c_hi / n));
  EXPECT_TRUE(within_se(c_hi, 2 * c_lo, se_c));
  EXPECT_NEAR(c_hi, 0.8 * 0.09, 4 * std::sqrt(0.072 / n));
}

TEST(SimulateCounts, MissingResponsesAreConfigErrors) {
  const auto net = optics::presets::singlet_pbs(0.3);
  ResponseSet partial = constant_responses(4, 0.3, 0.09, net);
  partial.joint.erase(partial.joint.begin());
  SimulationOptions opt;
  opt.trials = 10;
  EXPECT_THROW(simulate_counts(net, {partial}, {{1, 1, 1, 1}}, {{0, 0}}, opt), ConfigError);
  EXPECT_THROW(simulate_counts(net, {}, {{1, 1, 1, 1}}, {{0, 0}}, opt), ConfigError);
  EXPECT_THROW(simulate_counts(net, {constant_responses(4, 0.3, 0.09, net)}, {{1, 1, 1, 1}}, {}, opt),
               ConfigError);
}

TEST(SimulateCounts, UncorrelatedGivesZeroCorrelations) {
  const auto net = optics::presets::singlet_pbs(0.0);
  SimulationOptions opt;
  opt.trials = 200000;
  const auto runs = simulate_counts(net, {constant_responses(4, 0.3, 0.09, net)}, {{1, 1, 1, 1}},
                                    kChshSettings, opt);
  for (auto conv : {Convention::PostSelected, Convention::AllTrials}) {
    const auto rep = chsh(runs, conv);
    for (const auto& c : rep.correlations) EXPECT_TRUE(within_se(c.E, 0.0, c.se));
    EXPECT_LE(rep.S, 4 * rep.S_se * 2);
  }
}

TEST(SimulateCounts, ThreadCountDoesNotChangeCounts) {
  const auto net = optics::presets::singlet_pbs(0.3);
  SimulationOptions opt;
  opt.trials = 50000;
  const auto resp = constant_responses(4, 0.3, 0.09, net);
  const auto a = simulate_counts(net, {resp}, {{1, 1, 1, 1}}, kChshSettings, opt);
  opt.threads = 3;
  const auto b = simulate_counts(net, {resp}, {{1, 1, 1, 1}}, kChshSettings, opt);
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a[s].table, b[s].table);
}

TEST(EstimateMarginal, Examples) {
  EXPECT_DOUBLE_EQ(estimate_marginal({0, 0, 1, 50, 100, 30}), 0.30);
  EXPECT_DOUBLE_EQ(estimate_marginal({0, 0, 1, 50, 100, 0}), 0.0);
  EXPECT_THROW(estimate_marginal({0, 0, 1, 50, 0, 0}), UndefinedEstimate);
  EXPECT_THROW(estimate_marginal({0, 0, 1, 5, 100, 30}), ConfigError);
}

TEST(Chsh, ConventionsOnKnownCounts) {
  // Perfect anticorrelation at every setting with half the trials lost.
  std::vector<SettingCounts> runs(4, counts_with({0, 250, 0, 250, 0, 0, 0, 0, 500}));
  const auto post = chsh(runs, Convention::PostSelected);
  for (const auto& c : post.correlations) EXPECT_DOUBLE_EQ(c.E, -1.0);
  EXPECT_DOUBLE_EQ(post.S, 2.0);
  const auto all = chsh(runs, Convention::AllTrials);
  for (const auto& c : all.correlations) EXPECT_DOUBLE_EQ(c.E, -0.5);
  EXPECT_DOUBLE_EQ(all.S, 1.0);
  EXPECT_THROW(chsh({runs[0], runs[1], runs[2]}, Convention::AllTrials), ConfigError);
  std::vector<SettingCounts> empty(4, counts_with({0, 0, 0, 0, 0, 0, 0, 0, 10}));
  EXPECT_THROW(chsh(empty, Convention::PostSelected), UndefinedEstimate);
}

TEST(Chsh, CountsRecordsRespectInvariant) {
  const auto sc = counts_with({10, 20, 30, 40, 50, 60, 70, 80, 90});
  const auto recs = counts_records(sc, SideLayout::of(optics::presets::singlet_pbs(0.1)), 2.5);
  ASSERT_EQ(recs.size(), 4u);
  for (const auto& r : recs) {
    EXPECT_NO_THROW(r.validate());
    EXPECT_EQ(r.dT, 2.5);
  }
  EXPECT_EQ(recs[0].n_i, 60u);
  EXPECT_EQ(recs[0].n_j, 120u);
  EXPECT_EQ(recs[0].n_ij, 10u);
  EXPECT_NEAR(recs[3].phi_a, std::numbers::pi / 2, 1e-15);
}

namespace {
optics::OpticalNetwork crystal_only() {
  optics::OpticalNetwork net;
  net.modes = {{0, "s"}, {1, "i"}};
  net.source_modes = {0, 1};
  net.devices.push_back({"c", optics::Crystal{0.3, 0.0, {{0, 1, 0.0}}}, {}, false});
  net.ports = {{1, "a", {0}, {}, 0, 0, Side::A, 1}, {2, "b", {1}, {}, 0, 0, Side::B, 1}};
  optics::validate(net);
  return net;
}

synth::ResponseTemplate dead_zone(double thr) {
  synth::ResponseTemplate t;
  t.kind = synth::TemplateKind::DeadLinearSaturate;
  t.threshold = thr;
  t.bins = 16;
  return t;
}
}  // namespace

TEST(FairSampling, NoAnalyzersNoSpread) {
  synth::PrimedOptions opt;
  opt.bank_size = 64;
  opt.inner = 16;
  const auto probe = fair_sampling_probe(crystal_only(), {synth::JointResponse::constant(0.2)}, 0, 1,
                                         {{0, 0}, {0.5, 1.0}, {1.0, -0.3}}, opt);
  EXPECT_EQ(probe.max_spread, 0.0);
  EXPECT_EQ(probe.confirmed_spread, 0.0);
  EXPECT_THROW(fair_sampling_probe(crystal_only(), {synth::JointResponse::constant(0.2)}, 0, 1, {{0, 0}}, opt),
               ConfigError);
}

TEST(FairSampling, IdenticalSettingsNoSpread) {
  const auto net = optics::presets::singlet_pbs(0.5);
  synth::IntensitySamples s = synth::IntensitySamples::uniform({0.5, 1.0, 2.0, 3.0}, {0.7, 1.5, 2.5, 0.2});
  const auto g = synth::synthesize_joint(0.1, s, dead_zone(0.6));
  synth::PrimedOptions opt;
  opt.bank_size = 32;
  opt.inner = 32;
  const auto probe = fair_sampling_probe(net, {g}, 0, 2, {{0.3, 0.1}, {0.3, 0.1}}, opt);
  EXPECT_EQ(probe.max_spread, 0.0);
}

TEST(Enhancement, MonotoneResponseWithoutInjectedNoiseHasNoWitness) {
  const auto net = optics::presets::singlet_polarizers(0.5);
  synth::ResponseFunction f;
  f.edges = {0.0, 0.5, 1.0, 2.0, 1e9};
  f.values = {0.0, 0.2, 0.6, 1.0};
  synth::PrimedOptions opt;
  opt.bank_size = 500;
  opt.pin_devices = true;
  EXPECT_TRUE(enhancement_probe(net, f, 0, 0.4, opt).empty());
  EXPECT_TRUE(enhancement_probe(net, f, 0, std::nullopt, opt).empty());
}

TEST(Enhancement, DeadZoneResponseShowsWitness) {
  const auto net = optics::presets::singlet_polarizers(0.3);
  synth::ResponseFunction f;
  f.edges = {0.0, 1.5, 1e9};
  f.values = {0.0, 1.0};
  synth::PrimedOptions opt;
  opt.bank_size = 400;
  opt.inner = 400;
  const auto w = enhancement_probe(net, f, 0, 0.0, opt);
  ASSERT_FALSE(w.empty());
  // Direct check on the first witness: the bare detector stays dark more often.
  EXPECT_GT(w[0].with_analyzer, w[0].without_analyzer);
  EXPECT_TRUE(enhancement_probe(net, f, 0, std::nullopt, opt).empty());
}
