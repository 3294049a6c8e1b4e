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

// End-to-end Bell experiment: calibration constants, response synthesis for
// every setting, the trial loop, and the oracle-side expectations used to
// check it.
//
// Detection targets are K_m <I_p - I0_p> and K_j <(I_p - I0_p)(I_q - I0_q)>
// with the moments taken from the Gaussian oracle, so they carry no Monte
// Carlo noise. Shaped responses are fitted on a sampled calibration set
// and checked on an independent held-out set.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zpfsim/bell.hpp"
#include "zpfsim/errors.hpp"
#include "zpfsim/optics.hpp"
#include "zpfsim/parallel.hpp"
#include "zpfsim/rng.hpp"
#include "zpfsim/synth.hpp"

namespace zpfsim::experiment {

using bell::Setting;
using PortPair = std::pair<std::size_t, std::size_t>;

struct Calibration {
  std::optional<double> K_m;  ///< fixed value; automatic when unset
  std::optional<double> K_j;
  double brightest = 0.25;    ///< largest single-port target allowed by the automatic rule
};

struct ProbeConfig {
  bool fair_sampling = false;
  bool enhancement = false;
  std::size_t bank_size = 256;
  std::size_t inner = 256;
  std::optional<double> enhancement_phi;  ///< unset compares the bare setup with itself
  std::size_t enhancement_port = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  optics::OpticalNetwork network;
  Calibration calibration;
  synth::ResponseTemplate marginal_template;
  synth::ResponseTemplate joint_template;
  bell::EfficiencyParams efficiency;
  std::vector<Setting> settings;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t synthesis_samples = 20000;
  double window = 1.0;
  ProbeConfig probes;
  std::vector<Setting> moment_settings;  ///< angle pairs for the oracle moment check
  std::uint64_t moment_trials = 0;       ///< 0 disables the moment check

  void validate() const {
    if (settings.empty()) throw ConfigError("settings: at least one analyzer setting required");
    if (trials == 0) throw ConfigError("trials must be at least 1");
    if (synthesis_samples < 2) throw ConfigError("synthesis samples must be at least 2");
    if (!(window > 0.0)) throw ConfigError("window must be positive");
    efficiency.validate(network.ports.size());
    marginal_template.validate();
    joint_template.validate();
    if (calibration.K_m && !(*calibration.K_m >= 0.0)) throw ConfigError("K_m must be nonnegative");
    if (calibration.K_j && !(*calibration.K_j >= 0.0)) throw ConfigError("K_j must be nonnegative");
    if (!(calibration.brightest > 0.0 && calibration.brightest <= 1.0))
      throw ConfigError("calibration brightest must lie in (0,1]");
    if (probes.enhancement && probes.enhancement_port >= network.ports.size())
      throw ConfigError("enhancement port out of range");
  }
};

/// Cross-side port pairs (A port, B port) in network order.
inline std::vector<PortPair> cross_pairs(const optics::OpticalNetwork& net) {
  std::vector<PortPair> out;
  for (auto p : net.ports_on(optics::Side::A))
    for (auto q : net.ports_on(optics::Side::B)) out.emplace_back(p, q);
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationResult {
  double K_m = 0.0;
  double K_j = 0.0;
  bool automatic_m = false;
  bool automatic_j = false;
  std::vector<double> excess_mean;                    ///< per port (setting independent)
  std::vector<std::map<PortPair, double>> excess_product;  ///< per setting
};

/// Automatic rule: the brightest port fires with probability `brightest`,
/// no side's detection probabilities sum above 1, and every coincidence
/// row fits under its port's marginal, for every setting.
inline CalibrationResult calibrate(const optics::OpticalNetwork& network, const std::vector<Setting>& settings,
                                   const Calibration& cal) {
  CalibrationResult r;
  const auto pairs = cross_pairs(network);
  for (const auto& s : settings) {
    const auto net = optics::configured(network, s.phi_a, s.phi_b);
    const optics::MomentOracle oracle(net);
    if (r.excess_mean.empty())
      for (const auto& p : net.ports) r.excess_mean.push_back(oracle.excess_mean(p));
    std::map<PortPair, double> g;
    for (const auto& pq : pairs) g[pq] = oracle.excess_product(net.ports[pq.first], net.ports[pq.second]);
    r.excess_product.push_back(std::move(g));
  }
  if (cal.K_m) {
    r.K_m = *cal.K_m;
  } else {
    r.automatic_m = true;
    double mmax = 0.0;
    double side_max = 0.0;
    for (auto side : {optics::Side::A, optics::Side::B}) {
      double s = 0.0;
      for (auto p : network.ports_on(side)) {
        mmax = std::max(mmax, r.excess_mean[p]);
        s += r.excess_mean[p];
      }
      side_max = std::max(side_max, s);
    }
    if (!(mmax > 0.0))
      throw CalibrationError("automatic K_m needs a positive excess intensity; set K_m explicitly");
    r.K_m = std::min(cal.brightest / mmax, 1.0 / side_max);
  }
  if (cal.K_j) {
    r.K_j = *cal.K_j;
  } else {
    r.automatic_j = true;
    double gmax = 0.0;
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& g : r.excess_product) {
      std::map<std::size_t, double> row;
      for (const auto& [pq, v] : g) {
        gmax = std::max(gmax, v);
        row[pq.first] += v;
        row[pq.second] += v;
      }
      for (const auto& [p, sum] : row)
        if (sum > 0.0) bound = std::min(bound, r.K_m * r.excess_mean[p] / sum);
    }
    if (!(gmax > 0.0))
      throw CalibrationError("automatic K_j needs a positive excess correlation; set K_j explicitly");
    r.K_j = std::min(cal.brightest / gmax, bound);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Synthesis

struct HoldoutCheck {
  double value = 0.0;  ///< expectation of the synthesized response on held-out samples
  double se = 0.0;
};

struct SettingSynthesis {
  Setting setting;
  bell::ResponseSet responses;
  std::vector<double> marginal_target;
  std::map<PortPair, double> joint_target;
  std::vector<HoldoutCheck> marginal_holdout;
  std::map<PortPair, HoldoutCheck> joint_holdout;

  double worst_residual() const {
    double r = 0.0;
    for (const auto& f : responses.marginal) r = std::max(r, f.residual);
    for (const auto& [pq, g] : responses.joint) r = std::max(r, g.residual);
    return r;
  }
};

/// Port intensities for `count` source-plus-device draws of one setting.
inline std::vector<std::vector<double>> sample_port_intensities(const optics::OpticalNetwork& net, std::uint64_t seed,
                                                                std::uint32_t stream, std::size_t count,
                                                                unsigned threads) {
  const optics::FieldSampler sampler(net, seed, stream);
  std::vector<std::vector<double>> I(net.ports.size(), std::vector<double>(count));
  parallel::for_each_block(count, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    optics::Field f;
    for (std::size_t k = lo; k < hi; ++k) {
      sampler.sample(k, f);
      optics::apply_devices(net, f);
      for (std::size_t p = 0; p < net.ports.size(); ++p) I[p][k] = optics::intensity(f, net.ports[p].collected_modes);
    }
  });
  return I;
}

namespace detail {
inline HoldoutCheck mean_se(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / n)};
}

inline synth::ResponseTemplate port_template(synth::ResponseTemplate t, const optics::DetectorPort& p) {
  if (p.threshold > 0.0) t.threshold = p.threshold;
  return t;
}
}  // namespace detail

inline std::vector<SettingSynthesis> synthesize_responses(const ExperimentConfig& cfg, const CalibrationResult& cal) {
  const auto pairs = cross_pairs(cfg.network);
  std::vector<SettingSynthesis> out;
  for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
    const auto net = optics::configured(cfg.network, cfg.settings[s].phi_a, cfg.settings[s].phi_b);
    const auto fit = sample_port_intensities(net, cfg.seed, streams::kSynthesis, cfg.synthesis_samples, cfg.threads);
    const auto hold = sample_port_intensities(net, cfg.seed, streams::kHoldout, cfg.synthesis_samples, cfg.threads);
    SettingSynthesis ss;
    ss.setting = cfg.settings[s];
    for (std::size_t p = 0; p < net.ports.size(); ++p) {
      const double target = cal.K_m * cal.excess_mean[p];
      ss.marginal_target.push_back(target);
      const auto f = synth::synthesize_marginal(target, synth::IntensitySamples::uniform(fit[p]),
                                                detail::port_template(cfg.marginal_template, net.ports[p]));
      std::vector<double> v(hold[p].size());
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(hold[p][k]);
      ss.marginal_holdout.push_back(detail::mean_se(v));
      ss.responses.marginal.push_back(f);
    }
    for (const auto& pq : pairs) {
      const double target = cal.K_j * cal.excess_product[s].at(pq);
      ss.joint_target[pq] = target;
      auto shape = cfg.joint_template;
      if (net.ports[pq.first].threshold > 0.0) shape.threshold = net.ports[pq.first].threshold;
      if (net.ports[pq.second].threshold > 0.0) shape.threshold_second = net.ports[pq.second].threshold;
      const auto g = synth::synthesize_joint(target, synth::IntensitySamples::uniform(fit[pq.first], fit[pq.second]),
                                             shape);
      std::vector<double> v(hold[pq.first].size());
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(hold[pq.first][k], hold[pq.second][k]);
      ss.joint_holdout[pq] = detail::mean_se(v);
      ss.responses.joint[pq] = g;
    }
    out.push_back(std::move(ss));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracle expectations

/// Exact 3x3 outcome probabilities per setting when every response is
/// constant (the per-alpha table is then the same for every alpha).
inline std::vector<std::array<double, 9>> expected_tables(const ExperimentConfig& cfg,
                                                          const std::vector<SettingSynthesis>& synthesis) {
  const auto layout = bell::SideLayout::of(cfg.network);
  std::vector<std::array<double, 9>> out;
  for (const auto& ss : synthesis) {
    for (const auto& f : ss.responses.marginal)
      if (f.values.size() != 1) throw UnsupportedError("expected_tables: responses must be constant");
    std::array<double, 2> fa{0, 0}, fb{0, 0};
    std::array<std::array<double, 2>, 2> d{};
    for (int x = 0; x < 2; ++x) {
      if (layout.a[x]) fa[x] = cfg.efficiency.eta[*layout.a[x]] * ss.responses.marginal[*layout.a[x]].values[0];
      if (layout.b[x]) fb[x] = cfg.efficiency.eta[*layout.b[x]] * ss.responses.marginal[*layout.b[x]].values[0];
    }
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if (layout.a[x] && layout.b[y]) {
          const auto p = *layout.a[x], q = *layout.b[y];
          const auto& g = ss.responses.joint.at({p, q});
          if (g.values.size() != 1) throw UnsupportedError("expected_tables: responses must be constant");
          d[x][y] = cfg.efficiency.eta[p] * cfg.efficiency.eta[q] * g.values[0];
        }
    std::array<double, 9> t{};
    bell::detail::outcome_table(fa, fb, d, t);
    out.push_back(t);
  }
  return out;
}

/// CHSH value of exact tables in the given convention.
inline double expected_chsh(const std::vector<std::array<double, 9>>& tables, bell::Convention conv) {
  require(tables.size() == 4, "expected_chsh: four settings required");
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& t = tables[i];
    const double same = t[bell::cell(0, 0)] + t[bell::cell(1, 1)];
    const double diff = t[bell::cell(0, 1)] + t[bell::cell(1, 0)];
    const double E = conv == bell::Convention::PostSelected ? (same - diff) / (same + diff) : same - diff;
    sum += (i == 3 ? -1.0 : 1.0) * E;
  }
  return std::abs(sum);
}

// ---------------------------------------------------------------------------
// Moment check

struct MomentCheck {
  Setting setting;
  std::string quantity;  ///< "mean a+" or "product a+,b-"
  double mc = 0.0;
  double se = 0.0;
  double oracle = 0.0;

  bool within(double k = 4.0) const { return std::abs(mc - oracle) <= k * se; }
};

/// Monte Carlo <I - I0> per port and <(I_p - I0_p)(I_q - I0_q)> per cross
/// pair against the oracle. All settings share the same draws.
inline std::vector<MomentCheck> measure_moments(const optics::OpticalNetwork& network,
                                                const std::vector<Setting>& settings, std::uint64_t trials,
                                                std::uint64_t seed, unsigned threads) {
  if (trials < 2) throw ConfigError("moment check needs at least two trials");
  const auto pairs = cross_pairs(network);
  const std::size_t P = network.ports.size(), Q = pairs.size(), S = settings.size();
  std::vector<optics::OpticalNetwork> nets;
  for (const auto& s : settings) nets.push_back(optics::configured(network, s.phi_a, s.phi_b));
  const optics::FieldSampler sampler(network, seed, streams::kSource);
  const std::size_t stride = P + Q;
  const std::size_t blocks = parallel::block_count(trials);
  // Per block: sums and sums of squares of every quantity under every setting.
  std::vector<std::vector<double>> sum(blocks, std::vector<double>(S * stride, 0.0)), sum2 = sum;
  parallel::for_each_block(trials, threads, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
    optics::Field base, f;
    std::vector<double> x(P);
    for (std::size_t k = lo; k < hi; ++k) {
      sampler.sample(k, base);
      for (std::size_t s = 0; s < S; ++s) {
        f = base;
        optics::apply_devices(nets[s], f);
        for (std::size_t p = 0; p < P; ++p)
          x[p] = optics::intensity(f, nets[s].ports[p].collected_modes) - nets[s].ports[p].vacuum_baseline;
        double* acc = sum[blk].data() + s * stride;
        double* acc2 = sum2[blk].data() + s * stride;
        for (std::size_t p = 0; p < P; ++p) {
          acc[p] += x[p];
          acc2[p] += x[p] * x[p];
        }
        for (std::size_t q = 0; q < Q; ++q) {
          const double v = x[pairs[q].first] * x[pairs[q].second];
          acc[P + q] += v;
          acc2[P + q] += v * v;
        }
      }
    }
  });
  std::vector<double> tot(S * stride, 0.0), tot2(S * stride, 0.0);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = 0; i < tot.size(); ++i) {
      tot[i] += sum[b][i];
      tot2[i] += sum2[b][i];
    }
  const double n = static_cast<double>(trials);
  std::vector<MomentCheck> out;
  for (std::size_t s = 0; s < S; ++s) {
    const optics::MomentOracle oracle(nets[s]);
    for (std::size_t i = 0; i < stride; ++i) {
      MomentCheck c;
      c.setting = settings[s];
      const double m = tot[s * stride + i] / n;
      c.mc = m;
      c.se = std::sqrt(std::max(0.0, tot2[s * stride + i] / n - m * m) / (n - 1.0));
      if (i < P) {
        c.quantity = "mean " + nets[s].ports[i].name;
        c.oracle = oracle.excess_mean(nets[s].ports[i]);
      } else {
        const auto& pq = pairs[i - P];
        c.quantity = "product " + nets[s].ports[pq.first].name + "," + nets[s].ports[pq.second].name;
        c.oracle = oracle.excess_product(nets[s].ports[pq.first], nets[s].ports[pq.second]);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full run

struct ExperimentResult {
  CalibrationResult calibration;
  std::vector<SettingSynthesis> synthesis;
  std::vector<bell::SettingCounts> counts;
  std::optional<bell::BellReport> post_selected;
  std::optional<bell::BellReport> all_trials;
  std::optional<bell::LhvCertificate> lhv_all_trials;  ///< table including no-detections
  std::optional<bell::LhvCertificate> lhv_post_selected;
  std::optional<bell::FairSamplingProbe> fair_sampling;
  std::optional<std::vector<bell::EnhancementWitness>> enhancement;
  std::vector<MomentCheck> moments;
};

inline std::vector<bell::ResponseSet> response_sets(const std::vector<SettingSynthesis>& s) {
  std::vector<bell::ResponseSet> out;
  for (const auto& x : s) out.push_back(x.responses);
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  r.calibration = calibrate(cfg.network, cfg.settings, cfg.calibration);
  r.synthesis = synthesize_responses(cfg, r.calibration);

  bell::SimulationOptions sim;
  sim.trials = cfg.trials;
  sim.seed = cfg.seed;
  sim.threads = cfg.threads;
  sim.window = cfg.window;
  r.counts = bell::simulate_counts(cfg.network, response_sets(r.synthesis), cfg.efficiency, cfg.settings, sim);

  const auto layout = bell::SideLayout::of(cfg.network);
  const bool full_layout = layout.a[0] && layout.a[1] && layout.b[0] && layout.b[1];
  if (cfg.settings.size() == 4) {
    auto guarded = [&](bell::Convention c) -> std::optional<bell::BellReport> {
      try {
        return bell::chsh(r.counts, c);
      } catch (const UndefinedEstimate&) {
        return std::nullopt;
      }
    };
    r.post_selected = guarded(bell::Convention::PostSelected);
    r.all_trials = guarded(bell::Convention::AllTrials);
    r.lhv_all_trials =
        bell::lhv_feasible(bell::bell_table(r.counts, false, bell::ToleranceMode::Statistical));
    if (full_layout) {
      try {
        r.lhv_post_selected =
            bell::lhv_feasible(bell::bell_table(r.counts, true, bell::ToleranceMode::Statistical));
      } catch (const UndefinedEstimate&) {
      }
    }
  }

  synth::PrimedOptions po;
  po.bank_size = cfg.probes.bank_size;
  po.inner = cfg.probes.inner;
  po.seed = cfg.seed;
  po.threads = cfg.threads;
  const auto pairs = cross_pairs(cfg.network);
  if (cfg.probes.fair_sampling && !pairs.empty() && cfg.settings.size() >= 2) {
    // The first cross pair (typically a+, b+) carries the probe.
    std::vector<synth::JointResponse> gammas;
    for (const auto& s : r.synthesis) gammas.push_back(s.responses.joint.at(pairs[0]));
    r.fair_sampling = bell::fair_sampling_probe(cfg.network, gammas, pairs[0].first, pairs[0].second,
                                                cfg.settings, po);
  }
  if (cfg.probes.enhancement) {
    const auto port = cfg.probes.enhancement_port;
    r.enhancement = bell::enhancement_probe(cfg.network, r.synthesis[0].responses.marginal[port], port,
                                            cfg.probes.enhancement_phi, po);
  }
  if (cfg.moment_trials > 0 && !cfg.moment_settings.empty())
    r.moments = measure_moments(cfg.network, cfg.moment_settings, cfg.moment_trials, cfg.seed, cfg.threads);
  return r;
}

}  // namespace zpfsim::experiment
