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

// Acceptance suite. Each criterion runs against the bundled configurations
// and returns a verdict, a one-line summary and the numbers behind it.
// The numbers never include timings, so they can be compared byte for byte
// across thread counts.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "zpfsim/config.hpp"
#include "zpfsim/experiment.hpp"
#include "zpfsim/foundations.hpp"
#include "zpfsim/io.hpp"
#include "zpfsim/kot.hpp"
#include "zpfsim/synth.hpp"

#ifndef ZPFSIM_SOURCE_DIR
#define ZPFSIM_SOURCE_DIR "."
#endif

namespace zpfsim::acceptance {

using io::json;

struct Options {
  std::filesystem::path config_dir = std::filesystem::path(ZPFSIM_SOURCE_DIR) / "configs";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;  ///< overrides the bundled seeds
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  json numbers;
  double seconds = 0.0;
  double budget = 0.0;  ///< seconds; 0 means unbounded
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char b[96];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

inline double se_of(double p, double n) { return std::sqrt(std::max(0.0, p * (1 - p)) / n); }

inline optics::OpticalNetwork with_gain(optics::OpticalNetwork net, double r) {
  for (auto& d : net.devices)
    if (auto* c = std::get_if<optics::Crystal>(&d.kind)) c->gain = r;
  optics::validate(net);
  return net;
}

template <class C>
C seeded(C c, const Options& o) {
  if constexpr (std::is_same_v<C, config::KotConfig>) {
    if (o.seed) c.run.seed = *o.seed;
    c.run.threads = o.threads;
  } else {
    if (o.seed) c.seed = *o.seed;
    c.threads = o.threads;
  }
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 1. Synthesis feasibility sweep

inline CriterionResult synthesis_sweep(const Options& o) {
  CriterionResult r{1, "synthesis feasibility sweep", false, "", {}, 0, 60};
  std::mt19937_64 eng(o.seed.value_or(20260101));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::exponential_distribution<double> Ex(1.0);
  constexpr int kInstances = 1000;
  int failures = 0, constant_nonzero = 0, shaped = 0, fallbacks = 0;
  double worst = 0.0, worst_check = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const bool joint = i % 2 == 1;
    const bool constant = (i / 2) % 3 == 0;
    const std::size_t n = 50 + static_cast<std::size_t>(U(eng) * 1950);
    synth::IntensitySamples s;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s.weight.push_back(0.05 + U(eng));
      total += s.weight.back();
      s.first.push_back(Ex(eng) * (0.2 + U(eng)));
      if (joint) s.second.push_back(Ex(eng) * (0.2 + U(eng)));
    }
    for (double& w : s.weight) w /= total;
    const double target = U(eng);
    synth::ResponseTemplate t;
    if (!constant) {
      t.kind = synth::TemplateKind::DeadLinearSaturate;
      t.threshold = 0.3 * U(eng);
      t.threshold_second = 0.3 * U(eng);
      t.cap = 0.7 + 0.3 * U(eng);
      t.bins = 4 + static_cast<std::size_t>(U(eng) * 60);
      ++shaped;
    }
    bool in_range = true;
    double residual, check;
    bool fell_back;
    if (joint) {
      const auto g = synth::synthesize_joint(target, s, t);
      for (double v : g.values) in_range = in_range && v >= 0.0 && v <= 1.0;
      residual = g.residual;
      check = std::abs(synth::expectation(g, s) - target);
      fell_back = g.fallback;
    } else {
      const auto f = synth::synthesize_marginal(target, s, t);
      for (double v : f.values) in_range = in_range && v >= 0.0 && v <= 1.0;
      residual = f.residual;
      check = std::abs(synth::expectation(f, s) - target);
      fell_back = f.fallback;
    }
    fallbacks += fell_back ? 1 : 0;
    if (constant && residual != 0.0) ++constant_nonzero;
    worst = std::max(worst, residual);
    worst_check = std::max(worst_check, check);
    if (!in_range || residual > 1e-9 || check > 1e-9) ++failures;
  }
  r.passed = failures == 0 && constant_nonzero == 0;
  r.summary = std::to_string(kInstances) + " instances (" + std::to_string(shaped) + " shaped, " +
              std::to_string(fallbacks) + " fell back to constant), failures " + std::to_string(failures) +
              ", worst residual " + detail::fmt("%.3g", worst) + ", worst re-check " +
              detail::fmt("%.3g", worst_check) + ", constant residual nonzero " + std::to_string(constant_nonzero);
  r.numbers = {{"instances", kInstances},      {"shaped", shaped},
               {"fallbacks", fallbacks},       {"failures", failures},
               {"worst_residual", io::rounded(worst)}, {"worst_recheck", io::rounded(worst_check)},
               {"constant_nonzero", constant_nonzero}};
  return r;
}

// ---------------------------------------------------------------------------
// 2. Vacuum nullity

inline CriterionResult vacuum_nullity(const Options& o) {
  CriterionResult r{2, "vacuum nullity", false, "", {}, 0, 60};
  auto cfg = detail::seeded(config::load_experiment((o.config_dir / "vacuum.yaml").string()), o);
  cfg.probes = {};
  cfg.moment_trials = 0;
  const auto res = experiment::run_experiment(cfg);
  const auto layout = bell::SideLayout::of(cfg.network);
  bool ok = cfg.trials >= 1000000;
  double worst = 0.0;
  json ports = json::array();
  for (std::size_t s = 0; s < res.counts.size(); ++s) {
    const auto& sc = res.counts[s];
    const double n = static_cast<double>(sc.trials);
    for (int x = 0; x < 2; ++x)
      for (int side = 0; side < 2; ++side) {
        const auto& slot = side == 0 ? layout.a[x] : layout.b[x];
        if (!slot) continue;
        const double p = static_cast<double>(side == 0 ? sc.side_a(x) : sc.side_b(x)) / n;
        const double se = detail::se_of(p, n);
        ok = ok && std::abs(p) <= 4.0 * se;
        worst = std::max(worst, p);
        ports.push_back({{"setting", s}, {"port", cfg.network.ports[*slot].name}, {"p", io::rounded(p)}, {"se", io::rounded(se)}});
      }
  }
  r.passed = ok;
  r.summary = "N=" + std::to_string(cfg.trials) + ", largest singles probability " + detail::fmt("%.3g", worst) +
              " over " + std::to_string(ports.size()) + " port/setting cells";
  r.numbers = {{"trials", cfg.trials}, {"ports", ports}};
  return r;
}

// ---------------------------------------------------------------------------
// 3. Oracle equivalence of moments

inline CriterionResult oracle_moments(const Options& o) {
  CriterionResult r{3, "oracle equivalence of moments", false, "", {}, 0, 300};
  const auto cfg = detail::seeded(config::load_experiment((o.config_dir / "singlet.yaml").string()), o);
  bool ok = cfg.moment_settings.size() >= 12 && cfg.moment_trials >= 1000000;
  std::size_t checked = 0, outside = 0;
  double worst_z = 0.0;
  json rows = json::array();
  for (double gain : {0.1, 0.3}) {
    const auto net = detail::with_gain(cfg.network, gain);
    const auto checks = experiment::measure_moments(net, cfg.moment_settings, cfg.moment_trials, cfg.seed, cfg.threads);
    for (const auto& c : checks) {
      ++checked;
      const double z = c.se > 0 ? std::abs(c.mc - c.oracle) / c.se : (c.mc == c.oracle ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
      if (!c.within(4.0)) ++outside;
      rows.push_back({{"gain", gain},
                      {"phi_a_deg", io::rounded(c.setting.phi_a / config::kDegree)},
                      {"phi_b_deg", io::rounded(c.setting.phi_b / config::kDegree)},
                      {"quantity", c.quantity},
                      {"mc", io::rounded(c.mc)},
                      {"se", io::rounded(c.se)},
                      {"oracle", io::rounded(c.oracle)}});
    }
  }
  r.passed = ok && outside == 0;
  r.summary = std::to_string(checked) + " moments at " + std::to_string(cfg.moment_settings.size()) +
              " angle pairs, r in {0.1, 0.3}, N=" + std::to_string(cfg.moment_trials) + "; outside 4 SE: " +
              std::to_string(outside) + ", max |z| " + detail::fmt("%.2f", worst_z);
  r.numbers = {{"checked", checked}, {"outside", outside}, {"rows", rows}};
  return r;
}

// ---------------------------------------------------------------------------
// 4. CHSH pair and 5. LHV ceiling share the singlet run.

struct SharedRuns {
  std::optional<experiment::ExperimentResult> singlet;
  std::optional<experiment::ExperimentResult> vacuum;
  std::optional<experiment::ExperimentResult> shaped;
};

inline const experiment::ExperimentResult& singlet_run(const Options& o, SharedRuns& runs) {
  if (!runs.singlet) {
    auto cfg = detail::seeded(config::load_experiment((o.config_dir / "singlet.yaml").string()), o);
    cfg.moment_trials = 0;
    runs.singlet = experiment::run_experiment(cfg);
  }
  return *runs.singlet;
}

inline CriterionResult chsh_pair(const Options& o, SharedRuns& runs) {
  CriterionResult r{4, "CHSH pair", false, "", {}, 0, 300};
  const auto cfg = config::load_experiment((o.config_dir / "singlet.yaml").string());
  const auto& res = singlet_run(o, runs);
  if (!res.post_selected || !res.all_trials) {
    r.summary = "CHSH undefined for the bundled singlet run";
    return r;
  }
  const auto& post = *res.post_selected;
  const auto& all = *res.all_trials;
  const double target = 2.0 * std::sqrt(2.0);
  const bool post_ok = std::abs(post.S - target) <= 0.02;
  const bool all_ok = all.S <= 2.0 + 4.0 * all.S_se;
  r.passed = post_ok && all_ok && cfg.trials >= 1000000;
  r.summary = "post-selected S=" + detail::fmt("%.4f", post.S) + "+-" + detail::fmt("%.4f", post.S_se) +
              " (|S-2sqrt2|=" + detail::fmt("%.4f", std::abs(post.S - target)) + "), all-trials S=" +
              detail::fmt("%.4f", all.S) + "+-" + detail::fmt("%.4f", all.S_se) + ", N=" + std::to_string(cfg.trials);
  r.numbers = {{"post_S", io::rounded(post.S)}, {"post_se", io::rounded(post.S_se)},
               {"all_S", io::rounded(all.S)},   {"all_se", io::rounded(all.S_se)}};
  return r;
}

inline CriterionResult lhv_ceiling(const Options& o, SharedRuns& runs) {
  CriterionResult r{5, "LHV ceiling", false, "", {}, 0, 60};
  json tables = json::array();
  bool all_local = true;
  auto record = [&](const std::string& name, const std::optional<bell::LhvCertificate>& c) {
    const bool ok = c && c->feasible;
    all_local = all_local && ok;
    tables.push_back({{"table", name}, {"feasible", ok}, {"required_scale", c ? io::rounded(c->required_scale) : 0.0}});
  };
  record("singlet all-trials", singlet_run(o, runs).lhv_all_trials);
  if (!runs.vacuum) {
    auto cfg = detail::seeded(config::load_experiment((o.config_dir / "vacuum.yaml").string()), o);
    cfg.probes = {};
    runs.vacuum = experiment::run_experiment(cfg);
  }
  record("vacuum all-trials", runs.vacuum->lhv_all_trials);
  if (!runs.shaped) {
    auto cfg = detail::seeded(config::load_experiment((o.config_dir / "singlet_shaped.yaml").string()), o);
    runs.shaped = experiment::run_experiment(cfg);
  }
  record("shaped all-trials", runs.shaped->lhv_all_trials);

  // Post-selected singlet table at unit efficiency.
  auto cfg = detail::seeded(config::load_experiment((o.config_dir / "singlet.yaml").string()), o);
  cfg.efficiency.eta.assign(cfg.network.ports.size(), 1.0);
  cfg.moment_trials = 0;
  cfg.probes = {};
  cfg.trials = std::min<std::uint64_t>(cfg.trials, 200000);
  const auto res = experiment::run_experiment(cfg);
  bool certified = false;
  double gap = 0.0;
  if (res.lhv_post_selected && !res.lhv_post_selected->feasible) {
    const auto& c = *res.lhv_post_selected;
    gap = c.observed_value - c.local_bound;
    certified = gap > 0.0;
  }
  r.passed = all_local && certified;
  r.summary = std::string("all-trials tables local: ") + (all_local ? "yes" : "no") + " (" +
              std::to_string(tables.size()) + " tables); eta=1 post-selected table " +
              (certified ? "infeasible, functional exceeds local bound by " + detail::fmt("%.4g", gap) : "not refuted");
  r.numbers = {{"tables", tables}, {"post_selected_certified", certified}, {"certificate_gap", io::rounded(gap)}};
  return r;
}

// ---------------------------------------------------------------------------
// 6. Counterexample model

inline CriterionResult counterexample(const Options& o) {
  CriterionResult r{6, "counterexample model", false, "", {}, 0, 1};
  const auto file = config::load_model((o.config_dir / "models" / "counterexample.yaml").string());
  const auto verdict = foundations::check_ch_factorability(file.model);
  double joint = 0.0, product = 0.0;
  for (const auto& w : verdict.witnesses)
    if (w.joint > joint) {
      joint = w.joint;
      product = w.product;
    }
  const auto aug = foundations::augment_to_deterministic(file.model);
  const bool deterministic = foundations::is_deterministic(aug.model).deterministic;
  const auto aug_verdict = foundations::check_ch_factorability(aug.model);
  const double diff = foundations::max_table_difference(foundations::marginalize(aug, file.model), file.model);
  r.passed = joint == 0.5 && product == 0.25 && deterministic && aug_verdict.gamma_factorable && diff <= 1e-12;
  r.summary = "joint " + detail::fmt("%.17g", joint) + " vs product " + detail::fmt("%.17g", product) +
              "; augmentation deterministic " + (deterministic ? "yes" : "no") + ", gamma-factorable " +
              (aug_verdict.gamma_factorable ? "yes" : "no") + ", re-marginalization error " + detail::fmt("%.3g", diff);
  r.numbers = {{"joint", joint},
               {"product", product},
               {"augmented_support", aug.model.lambdas()},
               {"deterministic", deterministic},
               {"gamma_factorable", aug_verdict.gamma_factorable},
               {"remarginalization_error", io::rounded(diff)}};
  return r;
}

// ---------------------------------------------------------------------------
// 7. Kot bias

inline CriterionResult kot_bias(const Options& o) {
  CriterionResult r{7, "Kot subset bias", false, "", {}, 0, 120};
  const auto cfg = detail::seeded(config::load_kot((o.config_dir / "kot_correlated.yaml").string()), o);
  const auto base = kot::estimate_bias(kot::run_gated_experiment(cfg.model, cfg.run), cfg.model);
  const std::vector<double> levels{0.9, 0.99, 1.0};
  const auto sweep = kot::bias_sweep(cfg.model, levels, cfg.run);
  bool monotone = true;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    monotone = monotone && std::abs(sweep[i].bias.bias) < std::abs(sweep[i - 1].bias.bias);
  const auto& last = sweep.back().bias;
  const bool vanishes = std::abs(last.bias) <= 4.0 * last.se;
  r.passed = base.sigma() > 5.0 && monotone && vanishes;
  std::string pts;
  json rows = json::array();
  for (const auto& p : sweep) {
    pts += (pts.empty() ? "" : ", ") + detail::fmt("%.2f:", p.level) + detail::fmt(" %.4g", p.bias.bias) +
           detail::fmt("+-%.2g", p.bias.se);
    rows.push_back({{"level", p.level}, {"bias", io::rounded(p.bias.bias)}, {"se", io::rounded(p.bias.se)}});
  }
  r.summary = "configured curve: bias " + detail::fmt("%.4g", base.bias) + " (" + detail::fmt("%.1f", base.sigma()) +
              " SE); sweep " + pts;
  r.numbers = {{"bias", io::rounded(base.bias)}, {"se", io::rounded(base.se)}, {"sweep", rows}};
  return r;
}

// ---------------------------------------------------------------------------
// 8. Fair-sampling breach

inline CriterionResult fair_sampling(const Options& o, SharedRuns& runs) {
  CriterionResult r{8, "fair-sampling breach witness", false, "", {}, 0, 120};
  if (!runs.shaped) {
    auto cfg = detail::seeded(config::load_experiment((o.config_dir / "singlet_shaped.yaml").string()), o);
    runs.shaped = experiment::run_experiment(cfg);
  }
  if (!runs.shaped->fair_sampling) {
    r.summary = "shaped configuration has no fair-sampling probe";
    return r;
  }
  const auto& f = *runs.shaped->fair_sampling;
  r.passed = f.confirmed_sigma() > 5.0;
  r.summary = "spread " + detail::fmt("%.4g", f.confirmed_spread) + "+-" + detail::fmt("%.2g", f.confirmed_se) + " (" +
              detail::fmt("%.1f", f.confirmed_sigma()) + " sigma) at bank cell " + std::to_string(f.bank_index) +
              " on fresh device draws";
  r.numbers = {{"bank_index", f.bank_index},
               {"search_spread", io::rounded(f.max_spread)},
               {"confirmed_spread", io::rounded(f.confirmed_spread)},
               {"confirmed_se", io::rounded(f.confirmed_se)}};
  return r;
}

// ---------------------------------------------------------------------------
// Suite

/// Criteria 1 to 8. Numeric results depend only on the configuration and
/// seed, never on `threads`.
inline std::vector<CriterionResult> run_numeric(const Options& o,
                                                const std::function<void(const CriterionResult&)>& progress = {}) {
  SharedRuns runs;
  std::vector<std::function<CriterionResult()>> steps = {
      [&] { return synthesis_sweep(o); },     [&] { return vacuum_nullity(o); },
      [&] { return oracle_moments(o); },      [&] { return chsh_pair(o, runs); },
      [&] { return lhv_ceiling(o, runs); },   [&] { return counterexample(o); },
      [&] { return kot_bias(o); },            [&] { return fair_sampling(o, runs); }};
  std::vector<CriterionResult> out;
  for (auto& step : steps) {
    const auto t0 = std::chrono::steady_clock::now();
    auto c = step();
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && c.seconds > c.budget) {
      c.passed = false;
      c.summary += "; runtime " + detail::fmt("%.1f s", c.seconds) + " over budget";
    }
    if (progress) progress(c);
    out.push_back(std::move(c));
  }
  return out;
}

inline json numbers_of(const std::vector<CriterionResult>& results) {
  json j = json::array();
  for (const auto& c : results) j.push_back({{"criterion", c.id}, {"passed", c.passed}, {"numbers", c.numbers}});
  return j;
}

/// 9. Reruns criteria 1 to 8 with a different thread count and compares
/// the serialized numbers byte for byte.
inline CriterionResult reproducibility(const Options& o, const std::vector<CriterionResult>& first) {
  CriterionResult r{9, "reproducibility across thread counts", false, "", {}, 0, 0};
  Options other = o;
  other.threads = o.threads == 1 ? 3 : 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto second = run_numeric(other);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto a = numbers_of(first).dump(), b = numbers_of(second).dump();
  r.passed = a == b;
  r.summary = "threads " + std::to_string(o.threads) + " vs " + std::to_string(other.threads) + ": digests " +
              io::hex(io::fnv1a(a)) + " / " + io::hex(io::fnv1a(b)) + (r.passed ? " (identical)" : " (differ)");
  r.numbers = {{"digest", io::hex(io::fnv1a(a))}};
  return r;
}

inline std::vector<CriterionResult> run_all(const Options& o,
                                            const std::function<void(const CriterionResult&)>& progress = {}) {
  auto out = run_numeric(o, progress);
  out.push_back(reproducibility(o, out));
  if (progress) progress(out.back());
  return out;
}

inline std::string line(const CriterionResult& c) {
  return std::string(c.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + " [" + c.title + "] " +
         c.summary + detail::fmt(" (%.1f s)", c.seconds);
}

}  // namespace zpfsim::acceptance
