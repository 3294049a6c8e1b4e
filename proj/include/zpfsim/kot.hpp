/*
   Copyright 2026 The zpfsim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Time-gated subsampling of a test function beta = <F>.
//
// Each trial draws lambda, picks one observable Q_m and asks the detector
// for a time-stamp. The detection-rate curve P_det(tau) is tabulated on a
// grid over one window (time in window units), so the accumulated detection
// probability is its grid average. On state lambda the curve is raised to
// the power 1 + w(lambda) with w >= 0, which makes the detected subset depend on
// lambda while leaving P_det = 1 untouched. The outcome is read at the
// time-stamp shifted by a fixed number of grid bins.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zpfsim/errors.hpp"
#include "zpfsim/parallel.hpp"
#include "zpfsim/rng.hpp"

namespace zpfsim::kot {

struct TimeGatedDetector {
  std::vector<double> curve;  ///< P_det per grid bin over one window
  double window = 1.0;        ///< window length in seconds (reporting only)

  void validate() const {
    if (curve.empty()) throw ConfigError("detection curve needs at least one bin");
    for (double v : curve)
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("detection curve values must lie in [0,1]");
    if (!(window > 0.0)) throw ConfigError("detection window must be positive");
  }

  std::size_t bins() const noexcept { return curve.size(); }

  /// Grid average of P_det(tau)^e: probability of any time-stamp in the window.
  double accumulated(double exponent = 1.0) const {
    double s = 0.0;
    for (double v : curve) s += std::pow(v, exponent);
    return s / static_cast<double>(curve.size());
  }

  double min_rate() const { return *std::min_element(curve.begin(), curve.end()); }
};

struct Observable {
  std::string name;
  std::array<double, 2> values{+1.0, -1.0};  ///< q1, q2
  std::vector<double> q1_probability;        ///< P(q1 | lambda) at mid-window
  double time_modulation = 0.0;              ///< slope of P(q1) across the window
  double coefficient = 1.0;                  ///< weight of Q_m in F
};

struct KotModel {
  std::vector<double> rho;            ///< lambda probabilities
  std::vector<double> gating_weight;  ///< w(lambda); the curve is raised to 1 + w
  std::vector<Observable> observables;
  TimeGatedDetector detector;
  std::size_t offset_bins = 0;

  std::size_t lambdas() const noexcept { return rho.size(); }

  void validate() const {
    if (rho.empty()) throw ConfigError("kot: empty lambda support");
    double s = 0.0;
    for (double p : rho) {
      if (!(p >= 0.0)) throw ConfigError("kot: lambda probabilities must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ConfigError("kot: lambda probabilities must sum to 1");
    if (gating_weight.size() != rho.size()) throw ConfigError("kot: one gating weight per lambda required");
    for (double w : gating_weight)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("kot: gating weights must be finite and >= 0");
    if (observables.empty()) throw ConfigError("kot: no observables");
    for (const auto& o : observables) {
      if (o.q1_probability.size() != rho.size())
        throw ConfigError("kot: observable '" + o.name + "' needs one q1 probability per lambda");
      for (double p : o.q1_probability)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("kot: q1 probabilities must lie in [0,1]");
      if (!std::isfinite(o.time_modulation) || !std::isfinite(o.coefficient))
        throw ConfigError("kot: observable '" + o.name + "' has a non-finite parameter");
    }
    detector.validate();
  }

  /// P(q1 | lambda, outcome bin), with the bin center in window units.
  double q1_at(const Observable& o, std::size_t lambda, std::size_t bin) const {
    const double tau = (static_cast<double>(bin) + 0.5) / static_cast<double>(detector.bins());
    return std::clamp(o.q1_probability[lambda] + o.time_modulation * (tau - 0.5), 0.0, 1.0);
  }

  /// Latent mean outcome of Q_m on lambda, time-stamp uniform over the window.
  double latent_mean(std::size_t m, std::size_t lambda) const {
    const auto& o = observables[m];
    double s = 0.0;
    for (std::size_t k = 0; k < detector.bins(); ++k) {
      const double p = q1_at(o, lambda, (k + offset_bins) % detector.bins());
      s += o.values[0] * p + o.values[1] * (1 - p);
    }
    return s / static_cast<double>(detector.bins());
  }

  /// Copy with the curve mapped affinely so that its minimum becomes `level`
  /// (a flat curve becomes the constant `level`).
  KotModel with_min_rate(double level) const {
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("kot: detection level must lie in [0,1]");
    KotModel m = *this;
    const double lo = detector.min_rate();
    for (double& v : m.detector.curve)
      v = lo < 1.0 ? 1.0 - (1.0 - level) * (1.0 - v) / (1.0 - lo) : 1.0 - (1.0 - level);
    return m;
  }
};

/// Exact full-ensemble beta = sum_m c_m <Q_m>, from the latent responses.
inline double exact_beta(const KotModel& model) {
  model.validate();
  double beta = 0.0;
  for (std::size_t m = 0; m < model.observables.size(); ++m) {
    double q = 0.0;
    for (std::size_t l = 0; l < model.lambdas(); ++l) q += model.rho[l] * model.latent_mean(m, l);
    beta += model.observables[m].coefficient * q;
  }
  return beta;
}

/// Exact beta as the detected subsets would estimate it, for comparison with
/// the simulated observed-subsets estimate.
inline double exact_observed_beta(const KotModel& model) {
  model.validate();
  const std::size_t T = model.detector.bins();
  double beta = 0.0;
  for (std::size_t m = 0; m < model.observables.size(); ++m) {
    const auto& o = model.observables[m];
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < model.lambdas(); ++l)
      for (std::size_t k = 0; k < T; ++k) {
        const double d = model.rho[l] * std::pow(model.detector.curve[k], 1.0 + model.gating_weight[l]) / static_cast<double>(T);
        const double p = model.q1_at(o, l, (k + model.offset_bins) % T);
        num += d * (o.values[0] * p + o.values[1] * (1 - p));
        den += d;
      }
    if (den <= 0.0) throw UndefinedEstimate("observable '" + o.name + "' is never detected");
    beta += o.coefficient * num / den;
  }
  return beta;
}

// ---------------------------------------------------------------------------
// Trial logs

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint32_t lambda = 0;
  std::uint32_t observable = 0;
  std::optional<double> t;        ///< detection time-stamp in seconds
  std::optional<double> outcome;  ///< present iff detected
  double latent = 0.0;            ///< latent mean outcome (simulation-only)
};

using TrialLog = std::vector<TrialRecord>;

struct RunOptions {
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

namespace detail {
inline std::size_t pick(const std::vector<double>& cum, double u) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}
}  // namespace detail

/// Trial k uses uniforms (k, block 0) for lambda and observable and
/// (k, block 1) for the time-stamp and the outcome. Models that differ only in
/// their curves therefore share lambda, observable and outcome draws.
inline TrialLog run_gated_experiment(const KotModel& model, const RunOptions& opt) {
  model.validate();
  if (opt.trials == 0) throw ConfigError("kot: trials must be at least 1");
  const std::size_t L = model.lambdas(), M = model.observables.size(), T = model.detector.bins();
  std::vector<double> cum_rho;
  double acc = 0.0;
  for (double p : model.rho) cum_rho.push_back(acc += p);
  // Per lambda: cumulative P_det(tau)^w / T over bins.
  std::vector<std::vector<double>> cum_det(L);
  for (std::size_t l = 0; l < L; ++l) {
    double c = 0.0;
    for (double v : model.detector.curve) cum_det[l].push_back(c += std::pow(v, 1.0 + model.gating_weight[l]) / static_cast<double>(T));
  }
  std::vector<std::vector<double>> latent(M, std::vector<double>(L));
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t l = 0; l < L; ++l) latent[m][l] = model.latent_mean(m, l);

  const CounterStream rng(opt.seed, streams::kKot);
  TrialLog log(opt.trials);
  parallel::for_each_block(opt.trials, opt.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const auto u0 = rng.uniforms(k, 0), u1 = rng.uniforms(k, 1);
      TrialRecord& r = log[k];
      r.trial = k;
      r.lambda = static_cast<std::uint32_t>(detail::pick(cum_rho, u0[0]));
      r.observable = static_cast<std::uint32_t>(std::min<std::size_t>(M - 1, static_cast<std::size_t>(u0[1] * static_cast<double>(M))));
      r.latent = latent[r.observable][r.lambda];
      const auto& cd = cum_det[r.lambda];
      if (!(u1[0] < cd.back())) continue;
      const std::size_t bin = detail::pick(cd, u1[0]);
      const double lo_edge = bin == 0 ? 0.0 : cd[bin - 1];
      const double frac = (u1[0] - lo_edge) / (cd[bin] - lo_edge);
      r.t = model.detector.window * (static_cast<double>(bin) + frac) / static_cast<double>(T);
      const auto& o = model.observables[r.observable];
      const double p = model.q1_at(o, r.lambda, (bin + model.offset_bins) % T);
      r.outcome = u1[1] < p ? o.values[0] : o.values[1];
    }
  });
  return log;
}

// ---------------------------------------------------------------------------
// Estimators

enum class BetaConvention { ObservedSubsets, FullEnsembleOracle };

struct TermEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

struct BetaEstimate {
  double beta = 0.0;
  double se = 0.0;
  std::vector<TermEstimate> terms;  ///< per observable
};

inline BetaEstimate estimate_beta(const TrialLog& log, const KotModel& model, BetaConvention conv) {
  const std::size_t M = model.observables.size();
  std::vector<double> sum(M, 0.0), sum2(M, 0.0);
  std::vector<std::uint64_t> n(M, 0);
  for (const auto& r : log) {
    if (r.observable >= M) throw ConfigError("kot: log refers to an unknown observable");
    double v;
    if (conv == BetaConvention::ObservedSubsets) {
      if (!r.outcome) continue;
      v = *r.outcome;
    } else {
      v = r.latent;
    }
    ++n[r.observable];
    sum[r.observable] += v;
    sum2[r.observable] += v * v;
  }
  BetaEstimate e;
  double var = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    if (n[m] == 0)
      throw UndefinedEstimate("kot: observable '" + model.observables[m].name + "' has no " +
                              (conv == BetaConvention::ObservedSubsets ? "detections" : "trials"));
    const double nm = static_cast<double>(n[m]);
    const double mean = sum[m] / nm;
    const double v = std::max(0.0, sum2[m] / nm - mean * mean);
    e.terms.push_back({mean, std::sqrt(v / nm), n[m]});
    e.beta += model.observables[m].coefficient * mean;
    var += model.observables[m].coefficient * model.observables[m].coefficient * v / nm;
  }
  e.se = std::sqrt(var);
  return e;
}

struct BiasEstimate {
  double observed = 0.0;
  double oracle = 0.0;
  double bias = 0.0;  ///< observed - oracle
  double se = 0.0;    ///< of the paired difference
  double sigma() const { return se > 0 ? std::abs(bias) / se : (bias != 0.0 ? INFINITY : 0.0); }
};

/// Observed minus oracle on the same log. The standard error uses the
/// per-trial influence of both ratio estimators, so their correlation
/// through shared trials is accounted for.
inline BiasEstimate estimate_bias(const TrialLog& log, const KotModel& model) {
  const auto obs = estimate_beta(log, model, BetaConvention::ObservedSubsets);
  const auto orc = estimate_beta(log, model, BetaConvention::FullEnsembleOracle);
  const std::size_t M = model.observables.size();
  std::vector<double> psi2(M, 0.0);
  for (const auto& r : log) {
    const std::size_t m = r.observable;
    const double nm = static_cast<double>(orc.terms[m].n);
    const double frac = static_cast<double>(obs.terms[m].n) / nm;
    double psi = -(r.latent - orc.terms[m].mean);
    if (r.outcome) psi += (*r.outcome - obs.terms[m].mean) / frac;
    psi2[m] += psi * psi;
  }
  BiasEstimate b;
  b.observed = obs.beta;
  b.oracle = orc.beta;
  b.bias = obs.beta - orc.beta;
  double var = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double nm = static_cast<double>(orc.terms[m].n);
    const double c = model.observables[m].coefficient;
    var += c * c * psi2[m] / (nm * nm);
  }
  b.se = std::sqrt(var);
  return b;
}

struct DetectedFraction {
  double fraction = 0.0;
  double se = 0.0;
  double expected = 0.0;  ///< sum over lambda of rho * accumulated probability
};

inline DetectedFraction detected_fraction(const TrialLog& log, const KotModel& model) {
  if (log.empty()) throw UndefinedEstimate("kot: empty log");
  std::uint64_t d = 0;
  for (const auto& r : log) d += r.outcome ? 1 : 0;
  DetectedFraction f;
  const double n = static_cast<double>(log.size());
  f.fraction = static_cast<double>(d) / n;
  f.se = std::sqrt(f.fraction * (1 - f.fraction) / n);
  for (std::size_t l = 0; l < model.lambdas(); ++l)
    f.expected += model.rho[l] * model.detector.accumulated(1.0 + model.gating_weight[l]);
  return f;
}

struct SubsetDistance {
  std::string observable;
  double tv = 0.0;  ///< binned total variation between detected and all trials of Q_m
  double se = 0.0;  ///< bootstrap
  std::uint64_t detected = 0;
  std::uint64_t trials = 0;
};

inline constexpr std::size_t kBootstrapResamples = 200;

namespace detail {
inline double tv_of(const std::vector<std::uint64_t>& det, const std::vector<std::uint64_t>& all) {
  std::uint64_t nd = 0, na = 0;
  for (std::size_t b = 0; b < det.size(); ++b) {
    nd += det[b];
    na += all[b];
  }
  if (nd == 0 || na == 0) return 0.0;
  double tv = 0.0;
  for (std::size_t b = 0; b < det.size(); ++b)
    tv += std::abs(static_cast<double>(det[b]) / static_cast<double>(nd) -
                   static_cast<double>(all[b]) / static_cast<double>(na));
  return 0.5 * tv;
}
}  // namespace detail

/// For each observable, how far the lambda distribution of its detected
/// trials is from that of all trials that chose it. Lambda values are the
/// bins. The bootstrap redraws the trial counts multinomially.
inline std::vector<SubsetDistance> subset_significance_report(const TrialLog& log, const KotModel& model,
                                                              std::uint64_t seed) {
  const std::size_t M = model.observables.size(), L = model.lambdas();
  // cells[m][2l + d]: trials of Q_m with lambda l, detected d.
  std::vector<std::vector<std::uint64_t>> cells(M, std::vector<std::uint64_t>(2 * L, 0));
  for (const auto& r : log) {
    if (r.observable >= M || r.lambda >= L) throw ConfigError("kot: log does not match the model");
    ++cells[r.observable][2 * r.lambda + (r.outcome ? 1 : 0)];
  }
  auto split = [&](const std::vector<std::uint64_t>& c, std::vector<std::uint64_t>& det, std::vector<std::uint64_t>& all) {
    det.assign(L, 0);
    all.assign(L, 0);
    for (std::size_t l = 0; l < L; ++l) {
      det[l] = c[2 * l + 1];
      all[l] = c[2 * l] + c[2 * l + 1];
    }
  };
  std::vector<SubsetDistance> out;
  for (std::size_t m = 0; m < M; ++m) {
    SubsetDistance d;
    d.observable = model.observables[m].name;
    std::vector<std::uint64_t> det, all;
    split(cells[m], det, all);
    for (std::size_t l = 0; l < L; ++l) {
      d.detected += det[l];
      d.trials += all[l];
    }
    d.tv = detail::tv_of(det, all);
    const auto w = CounterStream(seed, streams::kBootstrap).words(m, 0);
    std::mt19937_64 eng((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
    double s = 0.0, s2 = 0.0;
    std::vector<std::uint64_t> c(2 * L);
    for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
      std::uint64_t left = d.trials;
      double mass = 1.0;
      for (std::size_t i = 0; i < 2 * L; ++i) {
        const double p = d.trials ? static_cast<double>(cells[m][i]) / static_cast<double>(d.trials) : 0.0;
        if (i + 1 == 2 * L || mass <= 0.0) {
          c[i] = i + 1 == 2 * L ? left : 0;
        } else {
          std::binomial_distribution<std::uint64_t> bin(left, std::clamp(p / mass, 0.0, 1.0));
          c[i] = bin(eng);
        }
        left -= c[i];
        mass -= p;
      }
      split(c, det, all);
      const double tv = detail::tv_of(det, all);
      s += tv;
      s2 += tv * tv;
    }
    const double B = static_cast<double>(kBootstrapResamples);
    d.se = std::sqrt(std::max(0.0, s2 / B - (s / B) * (s / B)) * B / (B - 1));
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep over the minimum detection rate

struct SweepPoint {
  double level = 0.0;
  BiasEstimate bias;
};

/// Bias at several minimum detection rates. All points share lambda,
/// observable and outcome draws.
inline std::vector<SweepPoint> bias_sweep(const KotModel& model, const std::vector<double>& levels,
                                          const RunOptions& opt) {
  std::vector<SweepPoint> out;
  for (double lv : levels) {
    const auto m = model.with_min_rate(lv);
    out.push_back({lv, estimate_bias(run_gated_experiment(m, opt), m)});
  }
  return out;
}

}  // namespace zpfsim::kot
