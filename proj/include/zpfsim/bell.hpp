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

// Bell-test harness: trial simulation, rate estimators, CHSH/CH statistics,
// loophole probes and the local-strategy feasibility program.
//
// Each side reports one of three outcomes per trial: +1, -1 or no detection.
// Per hidden-variable draw alpha the joint law of the two outcomes is a 3x3
// table whose definite block is eta_p eta_q Gamma_pq(I_p, I_q) and whose
// margins are eta_p f_p(I_p). One uniform picks the cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zpfsim/errors.hpp"
#include "zpfsim/lp.hpp"
#include "zpfsim/optics.hpp"
#include "zpfsim/parallel.hpp"
#include "zpfsim/rng.hpp"
#include "zpfsim/synth.hpp"

namespace zpfsim::bell {

using optics::Side;

/// Outcome slots of the 3x3 tables.
enum Outcome : int { kPlus = 0, kMinus = 1, kNone = 2 };

inline constexpr std::size_t cell(int a, int b) { return static_cast<std::size_t>(3 * a + b); }

struct Setting {
  double phi_a = 0.0;
  double phi_b = 0.0;
};

struct EfficiencyParams {
  std::vector<double> eta;  ///< per detector port (network order)

  void validate(std::size_t ports) const {
    if (eta.size() != ports)
      throw ConfigError("efficiency: expected " + std::to_string(ports) + " values, got " +
                        std::to_string(eta.size()));
    for (double e : eta)
      if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("efficiency values must lie in [0,1]");
  }
};

/// Synthesized responses for every port and every cross-side port pair.
struct ResponseSet {
  std::vector<synth::ResponseFunction> marginal;                           ///< per port
  std::map<std::pair<std::size_t, std::size_t>, synth::JointResponse> joint;  ///< (port A, port B)
};

struct CountsRecord {
  double phi_a = 0.0;
  double phi_b = 0.0;
  double dT = 1.0;
  std::uint64_t n_i = 0;
  std::uint64_t n_j = 0;
  std::uint64_t n_ij = 0;

  void validate() const {
    if (!(dT > 0.0)) throw ConfigError("counts window must be positive");
    if (n_ij > std::min(n_i, n_j)) throw ConfigError("coincidences exceed singles");
  }
};

/// Full outcome table of one analyzer setting.
struct SettingCounts {
  Setting setting;
  std::uint64_t trials = 0;
  std::array<std::uint64_t, 9> table{};
  std::uint64_t repaired = 0;  ///< trials whose per-alpha table needed repair

  std::uint64_t side_a(int a) const { return table[cell(a, 0)] + table[cell(a, 1)] + table[cell(a, 2)]; }
  std::uint64_t side_b(int b) const { return table[cell(0, b)] + table[cell(1, b)] + table[cell(2, b)]; }
  std::uint64_t definite() const {
    return table[cell(0, 0)] + table[cell(0, 1)] + table[cell(1, 0)] + table[cell(1, 1)];
  }
};

/// Which port (if any) reports +1 and -1 on each side.
struct SideLayout {
  std::array<std::optional<std::size_t>, 2> a;
  std::array<std::optional<std::size_t>, 2> b;

  static SideLayout of(const optics::OpticalNetwork& net) {
    SideLayout l;
    for (std::size_t p = 0; p < net.ports.size(); ++p) {
      const auto& port = net.ports[p];
      auto& slot = (port.side == Side::A ? l.a : l.b)[port.outcome == 1 ? 0 : 1];
      if (slot)
        throw ConfigError("side " + std::string(optics::side_name(port.side)) +
                          " has two detectors reporting the same outcome");
      slot = p;
    }
    return l;
  }
};

namespace detail {

// Builds the per-alpha 3x3 law in place. Returns true when it had to be
// repaired (shaped responses can make the definite block exceed a margin).
inline bool outcome_table(const std::array<double, 2>& fa, const std::array<double, 2>& fb,
                          std::array<std::array<double, 2>, 2> d, std::array<double, 9>& t) {
  bool repaired = false;
  double kappa = 1.0;
  for (int x = 0; x < 2; ++x) {
    const double row = d[x][0] + d[x][1];
    if (row > fa[x] + 1e-15) kappa = std::min(kappa, fa[x] / row);
    const double col = d[0][x] + d[1][x];
    if (col > fb[x] + 1e-15) kappa = std::min(kappa, fb[x] / col);
  }
  if (kappa < 1.0) {
    repaired = true;
    for (auto& r : d)
      for (auto& v : r) v *= kappa;
  }
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) t[cell(x, y)] = d[x][y];
  for (int x = 0; x < 2; ++x) {
    t[cell(x, kNone)] = std::max(0.0, fa[x] - d[x][0] - d[x][1]);
    t[cell(kNone, x)] = std::max(0.0, fb[x] - d[0][x] - d[1][x]);
  }
  double used = 0.0;
  for (std::size_t c = 0; c < 8; ++c) used += t[c];
  t[8] = 1.0 - used;
  if (t[8] < -1e-12) {
    repaired = true;
    for (std::size_t c = 0; c < 8; ++c) t[c] /= used;
    t[8] = 0.0;
  }
  t[8] = std::max(0.0, t[8]);
  return repaired;
}

inline int pick(const std::array<double, 9>& t, double u) {
  double cum = 0.0;
  for (int c = 0; c < 8; ++c) {
    cum += t[static_cast<std::size_t>(c)];
    if (u < cum) return c;
  }
  return 8;
}

}  // namespace detail

struct SimulationOptions {
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double window = 1.0;  ///< dT written to counts records
};

/// Runs the trial loop for every setting. Each setting is an independent run:
/// trial k of setting s reads counter s * trials + k for its vacuum draw and
/// its decision uniform, so per-setting standard errors combine in quadrature.
/// `responses` holds one set per setting, or a single set shared by all.
inline std::vector<SettingCounts> simulate_counts(const optics::OpticalNetwork& network,
                                                  const std::vector<ResponseSet>& response_sets,
                                                  const EfficiencyParams& efficiency,
                                                  const std::vector<Setting>& settings,
                                                  const SimulationOptions& opt) {
  if (settings.empty()) throw ConfigError("simulate_counts: settings list is empty");
  if (opt.trials == 0) throw ConfigError("simulate_counts: trials must be at least 1");
  const std::size_t ports = network.ports.size();
  efficiency.validate(ports);
  if (response_sets.size() != 1 && response_sets.size() != settings.size())
    throw ConfigError("simulate_counts: need one response set per setting");
  const SideLayout layout = SideLayout::of(network);
  for (const auto& responses : response_sets) {
    if (responses.marginal.size() != ports)
      throw ConfigError("simulate_counts: missing marginal response tables");
    for (const auto& pa : layout.a)
      for (const auto& pb : layout.b)
        if (pa && pb && !responses.joint.count({*pa, *pb}))
          throw ConfigError("simulate_counts: missing joint response for ports " +
                            std::to_string(network.ports[*pa].id) + "," +
                            std::to_string(network.ports[*pb].id));
  }

  std::vector<optics::OpticalNetwork> configured;
  for (const auto& s : settings) configured.push_back(optics::configured(network, s.phi_a, s.phi_b));
  const optics::FieldSampler sampler(network, opt.seed, streams::kSource);
  const CounterStream decision(opt.seed, streams::kDecision);
  const std::size_t S = settings.size();

  const std::size_t blocks = parallel::block_count(opt.trials);
  std::vector<std::vector<SettingCounts>> partial(blocks, std::vector<SettingCounts>(S));
  parallel::for_each_block(opt.trials, opt.threads, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
    auto& out = partial[blk];
    optics::Field f;
    std::vector<double> I(ports);
    std::array<double, 9> t{};
    for (std::size_t k = lo; k < hi; ++k) {
      for (std::size_t s = 0; s < S; ++s) {
        const ResponseSet& responses = response_sets[response_sets.size() == 1 ? 0 : s];
        const std::uint64_t index = s * opt.trials + k;
        sampler.sample(index, f);
        const double u = decision.uniform(index, 0);
        optics::apply_devices(configured[s], f);
        for (std::size_t p = 0; p < ports; ++p)
          I[p] = optics::intensity(f, configured[s].ports[p].collected_modes);
        std::array<double, 2> fa{0, 0}, fb{0, 0};
        std::array<std::array<double, 2>, 2> d{};
        for (int x = 0; x < 2; ++x) {
          if (layout.a[x]) fa[x] = efficiency.eta[*layout.a[x]] * responses.marginal[*layout.a[x]](I[*layout.a[x]]);
          if (layout.b[x]) fb[x] = efficiency.eta[*layout.b[x]] * responses.marginal[*layout.b[x]](I[*layout.b[x]]);
        }
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) {
            if (!layout.a[x] || !layout.b[y]) continue;
            const std::size_t p = *layout.a[x], q = *layout.b[y];
            d[x][y] = efficiency.eta[p] * efficiency.eta[q] * responses.joint.at({p, q})(I[p], I[q]);
          }
        if (detail::outcome_table(fa, fb, d, t)) ++out[s].repaired;
        ++out[s].table[static_cast<std::size_t>(detail::pick(t, u))];
        ++out[s].trials;
      }
    }
  });
  std::vector<SettingCounts> total(S);
  for (std::size_t s = 0; s < S; ++s) {
    total[s].setting = settings[s];
    for (const auto& blk : partial) {
      total[s].trials += blk[s].trials;
      total[s].repaired += blk[s].repaired;
      for (std::size_t c = 0; c < 9; ++c) total[s].table[c] += blk[s].table[c];
    }
  }
  return total;
}

/// Singles/coincidence records for every cross-side port pair. A port that
/// reports -1 is listed at its analyzer angle plus 90 degrees.
inline std::vector<CountsRecord> counts_records(const SettingCounts& sc, const SideLayout& layout,
                                                double window) {
  std::vector<CountsRecord> out;
  const double quarter = std::acos(0.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      if (!layout.a[x] || !layout.b[y]) continue;
      CountsRecord r;
      r.phi_a = sc.setting.phi_a + (x == kMinus ? quarter : 0.0);
      r.phi_b = sc.setting.phi_b + (y == kMinus ? quarter : 0.0);
      r.dT = window;
      r.n_i = sc.side_a(x);
      r.n_j = sc.side_b(y);
      r.n_ij = sc.table[cell(x, y)];
      out.push_back(r);
    }
  return out;
}

/// n_ij / n_j: the experimenter's estimate of detector i's rate.
inline double estimate_marginal(const CountsRecord& c) {
  c.validate();
  if (c.n_j == 0) throw UndefinedEstimate("estimate_marginal: no detections at j");
  return static_cast<double>(c.n_ij) / static_cast<double>(c.n_j);
}

// ---------------------------------------------------------------------------
// CHSH / CH

enum class Convention { PostSelected, AllTrials };

inline const char* convention_name(Convention c) {
  return c == Convention::PostSelected ? "post-selected" : "all-trials";
}

struct Correlation {
  double E = 0.0;
  double se = 0.0;
};

inline Correlation correlation(const SettingCounts& sc, Convention conv) {
  const auto& t = sc.table;
  const double same = static_cast<double>(t[cell(kPlus, kPlus)] + t[cell(kMinus, kMinus)]);
  const double diff = static_cast<double>(t[cell(kPlus, kMinus)] + t[cell(kMinus, kPlus)]);
  const double def = same + diff;
  if (conv == Convention::PostSelected) {
    if (def == 0.0) throw UndefinedEstimate("post-selected correlation: no coincidences");
    const double E = (same - diff) / def;
    return {E, std::sqrt(std::max(0.0, 1.0 - E * E) / def)};
  }
  if (sc.trials == 0) throw UndefinedEstimate("all-trials correlation: no trials");
  const double n = static_cast<double>(sc.trials);
  const double E = (same - diff) / n;
  return {E, std::sqrt(std::max(0.0, def / n - E * E) / n)};
}

struct BellReport {
  Convention convention = Convention::PostSelected;
  std::array<Setting, 4> settings{};
  std::array<Correlation, 4> correlations{};
  double S = 0.0;
  double S_se = 0.0;
  double ch = 0.0;  ///< CH combination over all trials; <= 0 for local models
  double ch_se = 0.0;
  std::optional<bool> fair_sampling_breach;
  std::optional<bool> enhancement_witness;
};

/// Settings must be ordered (a,b), (a,b'), (a',b), (a',b').
/// S = |E1 + E2 + E3 - E4|.
inline BellReport chsh(const std::vector<SettingCounts>& runs, Convention conv) {
  if (runs.size() != 4)
    throw ConfigError("chsh needs exactly four settings, got " + std::to_string(runs.size()));
  BellReport r;
  r.convention = conv;
  double sum = 0.0, var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    r.settings[i] = runs[i].setting;
    r.correlations[i] = correlation(runs[i], conv);
    sum += (i == 3 ? -1.0 : 1.0) * r.correlations[i].E;
    var += r.correlations[i].se * r.correlations[i].se;
  }
  r.S = std::abs(sum);
  r.S_se = std::sqrt(var);
  auto p = [](const SettingCounts& sc, std::uint64_t n) {
    return static_cast<double>(n) / static_cast<double>(sc.trials);
  };
  double ch_var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double q = p(runs[i], runs[i].table[cell(kPlus, kPlus)]);
    r.ch += (i == 3 ? -1.0 : 1.0) * q;
    ch_var += q * (1 - q) / static_cast<double>(runs[i].trials);
  }
  const double pa = p(runs[0], runs[0].side_a(kPlus)), pb = p(runs[0], runs[0].side_b(kPlus));
  r.ch -= pa + pb;
  ch_var += (pa * (1 - pa) + pb * (1 - pb)) / static_cast<double>(runs[0].trials);
  r.ch_se = std::sqrt(ch_var);
  return r;
}

// ---------------------------------------------------------------------------
// Local-strategy feasibility

/// Four settings x nine outcome cells. Row order follows chsh(); within a
/// row, cell(a, b) with +1, -1, none.
struct BellTable {
  std::array<std::array<double, 9>, 4> p{};
  std::array<std::array<double, 9>, 4> tol{};
  std::array<double, 4> samples{};  ///< trials behind each row; 0 for exact tables
};

enum class ToleranceMode { Absolute, Statistical };

inline constexpr double kLpTolerance = 1e-6;

/// Frequencies from counts. post_selected keeps only two-sided detections and
/// renormalizes them. Statistical tolerances are 4 SE per cell with a 1/N
/// variance floor; absolute tolerances are kLpTolerance.
inline BellTable bell_table(const std::vector<SettingCounts>& runs, bool post_selected,
                            ToleranceMode mode) {
  if (runs.size() != 4) throw ConfigError("bell_table needs exactly four settings");
  BellTable t;
  for (std::size_t s = 0; s < 4; ++s) {
    const double n = post_selected ? static_cast<double>(runs[s].definite())
                                   : static_cast<double>(runs[s].trials);
    if (n <= 0) throw UndefinedEstimate("bell_table: empty setting");
    t.samples[s] = n;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const auto c = cell(a, b);
        const bool keep = !post_selected || (a != kNone && b != kNone);
        const double q = keep ? static_cast<double>(runs[s].table[c]) / n : 0.0;
        t.p[s][c] = q;
        t.tol[s][c] = mode == ToleranceMode::Absolute
                          ? kLpTolerance
                          : std::max(kLpTolerance, 4.0 * std::sqrt(std::max(q * (1 - q), 1.0 / n) / n));
      }
  }
  return t;
}

/// Deterministic local strategy: outcome per setting on each side.
struct Strategy {
  std::array<int, 2> a{};
  std::array<int, 2> b{};
};

inline std::vector<Strategy> deterministic_strategies() {
  std::vector<Strategy> out;
  for (int sa = 0; sa < 9; ++sa)
    for (int sb = 0; sb < 9; ++sb) out.push_back({{sa / 3, sa % 3}, {sb / 3, sb % 3}});
  return out;
}

/// 36 x 81 incidence matrix: row (setting, cell), column strategy.
inline Eigen::MatrixXd strategy_matrix() {
  const auto strategies = deterministic_strategies();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(36, static_cast<Eigen::Index>(strategies.size()));
  for (std::size_t j = 0; j < strategies.size(); ++j)
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const auto row = static_cast<Eigen::Index>(9 * (2 * x + y) + static_cast<int>(cell(strategies[j].a[x], strategies[j].b[y])));
        D(row, static_cast<Eigen::Index>(j)) = 1.0;
      }
  return D;
}

struct LhvCertificate {
  bool feasible = false;
  /// Smallest multiple of the cell tolerances a local mixture needs.
  double required_scale = 0.0;
  std::vector<std::pair<std::size_t, double>> mixture;  ///< (strategy, weight), feasible only
  std::array<double, 36> functional{};                  ///< Bell functional z, infeasible only
  double local_bound = 0.0;                             ///< max over strategies of z.d
  double observed_value = 0.0;                          ///< z.p
};

/// Checks that one side's outcome frequencies do not depend on the other
/// side's setting. Throws ConfigError otherwise.
inline void check_no_signaling(const BellTable& t) {
  auto tol = [&](std::size_t r1, std::size_t r2, double q1, double q2) {
    if (t.samples[r1] <= 0 || t.samples[r2] <= 0) return 3 * kLpTolerance * 2;
    const double v1 = std::max(q1 * (1 - q1), 1.0 / t.samples[r1]) / t.samples[r1];
    const double v2 = std::max(q2 * (1 - q2), 1.0 / t.samples[r2]) / t.samples[r2];
    return std::max(6 * kLpTolerance, 4.0 * std::sqrt(v1 + v2));
  };
  for (int x = 0; x < 2; ++x)
    for (int o = 0; o < 3; ++o) {
      const std::size_t r1 = static_cast<std::size_t>(2 * x), r2 = r1 + 1;
      double q1 = 0, q2 = 0;
      for (int b = 0; b < 3; ++b) {
        q1 += t.p[r1][cell(o, b)];
        q2 += t.p[r2][cell(o, b)];
      }
      if (std::abs(q1 - q2) > tol(r1, r2, q1, q2))
        throw ConfigError("no-signaling violation: side a marginal depends on side b setting");
    }
  for (int y = 0; y < 2; ++y)
    for (int o = 0; o < 3; ++o) {
      const std::size_t r1 = static_cast<std::size_t>(y), r2 = r1 + 2;
      double q1 = 0, q2 = 0;
      for (int a = 0; a < 3; ++a) {
        q1 += t.p[r1][cell(a, o)];
        q2 += t.p[r2][cell(a, o)];
      }
      if (std::abs(q1 - q2) > tol(r1, r2, q1, q2))
        throw ConfigError("no-signaling violation: side b marginal depends on side a setting");
    }
}

/// LP over the 81 deterministic local strategies.
///   primal: min t  s.t. |D x - p| <= t tol, 1.x = 1, x >= 0
///   dual:   max z.p - v  s.t. z.d_s <= v for all s, sum |z_k| tol_k <= 1
/// Both optima equal t*. Feasible iff t* <= 1; otherwise z is a Bell
/// functional whose observed value exceeds its local bound by more than the
/// tolerance allows.
inline LhvCertificate lhv_feasible(const BellTable& table) {
  for (const auto& row : table.p) {
    double s = 0.0;
    for (double v : row) {
      if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw ConfigError("table entries must lie in [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ConfigError("each setting row must sum to 1");
  }
  check_no_signaling(table);
  const Eigen::MatrixXd D = strategy_matrix();
  const Eigen::Index K = D.rows(), S = D.cols();
  Eigen::VectorXd p(K), tol(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    p(k) = table.p[static_cast<std::size_t>(k / 9)][static_cast<std::size_t>(k % 9)];
    tol(k) = table.tol[static_cast<std::size_t>(k / 9)][static_cast<std::size_t>(k % 9)];
    if (!(tol(k) > 0.0)) throw ConfigError("cell tolerances must be positive");
  }
  // Work with u = t * tau so every coefficient is of order one.
  const double tau = tol.maxCoeff();
  const Eigen::VectorXd w = tol / tau;

  // Primal: variables x (S) and t.
  lp::Problem primal;
  primal.A = Eigen::MatrixXd::Zero(2 * K + 1, S + 1);
  primal.b = Eigen::VectorXd::Zero(2 * K + 1);
  primal.c = Eigen::VectorXd::Zero(S + 1);
  primal.c(S) = 1.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    primal.A.row(k).head(S) = D.row(k);
    primal.A(k, S) = -w(k);
    primal.b(k) = p(k);
    primal.A.row(K + k).head(S) = -D.row(k);
    primal.A(K + k, S) = -w(k);
    primal.b(K + k) = -p(k);
  }
  primal.A.row(2 * K).head(S).setOnes();
  primal.b(2 * K) = 1.0;
  primal.kinds.assign(2 * K, lp::RowKind::LessEqual);
  primal.kinds.push_back(lp::RowKind::Equal);
  const lp::Result pr = lp::solve(primal);
  if (pr.status != lp::Status::Optimal)
    throw NumericContractError(std::string("lhv primal LP ended ") + lp::status_name(pr.status));

  LhvCertificate cert;
  cert.required_scale = pr.x(S) / tau;
  cert.feasible = cert.required_scale <= 1.0;
  if (cert.feasible) {
    for (Eigen::Index j = 0; j < S; ++j)
      if (pr.x(j) > 1e-12) cert.mixture.emplace_back(static_cast<std::size_t>(j), pr.x(j));
    return cert;
  }

  // Dual: variables z+ (K), z- (K), v+, v-; minimize -(z.p - v).
  lp::Problem dual;
  const Eigen::Index nv = 2 * K + 2;
  dual.A = Eigen::MatrixXd::Zero(S + 1, nv);
  dual.b = Eigen::VectorXd::Zero(S + 1);
  dual.c = Eigen::VectorXd::Zero(nv);
  dual.c.head(K) = -p;
  dual.c.segment(K, K) = p;
  dual.c(2 * K) = 1.0;
  dual.c(2 * K + 1) = -1.0;
  for (Eigen::Index s = 0; s < S; ++s) {
    dual.A.row(s).head(K) = D.col(s).transpose();
    dual.A.row(s).segment(K, K) = -D.col(s).transpose();
    dual.A(s, 2 * K) = -1.0;
    dual.A(s, 2 * K + 1) = 1.0;
  }
  dual.A.row(S).head(K) = w.transpose();
  dual.A.row(S).segment(K, K) = w.transpose();
  dual.b(S) = 1.0;
  dual.kinds.assign(S + 1, lp::RowKind::LessEqual);
  const lp::Result dr = lp::solve(dual);
  if (dr.status != lp::Status::Optimal)
    throw NumericContractError(std::string("lhv dual LP ended ") + lp::status_name(dr.status));
  const Eigen::VectorXd z = (dr.x.head(K) - dr.x.segment(K, K)) / tau;
  for (Eigen::Index k = 0; k < K; ++k) cert.functional[static_cast<std::size_t>(k)] = z(k);
  cert.local_bound = (z.transpose() * D).maxCoeff();
  cert.observed_value = z.dot(p);
  return cert;
}

// ---------------------------------------------------------------------------
// Loophole probes

struct FairSamplingProbe {
  double max_spread = 0.0;      ///< max over the bank of (max - min) across settings
  double spread_se = 0.0;
  std::size_t bank_index = 0;   ///< where the max was found
  std::size_t setting_hi = 0;
  std::size_t setting_lo = 0;
  double confirmed_spread = 0.0;  ///< same cell and settings, fresh device draws
  double confirmed_se = 0.0;

  double confirmed_sigma() const {
    return confirmed_se > 0 ? confirmed_spread / confirmed_se : (confirmed_spread > 0 ? INFINITY : 0.0);
  }
};

/// Per-alpha_s coincidence probability Gamma_hat'(phi, alpha_s) on a fixed
/// bank, compared across settings. The confirmation pass redraws the device
/// vacua for the selected cell so the reported significance is free of the
/// max-over-bank selection.
/// `gammas` holds the joint response of each setting, or one shared by all.
inline FairSamplingProbe fair_sampling_probe(const optics::OpticalNetwork& network,
                                             const std::vector<synth::JointResponse>& gammas,
                                             std::size_t port_i,
                                             std::size_t port_j, const std::vector<Setting>& settings,
                                             const synth::PrimedOptions& opt) {
  if (settings.size() < 2) throw ConfigError("fair_sampling_probe needs at least two settings");
  if (gammas.size() != 1 && gammas.size() != settings.size())
    throw ConfigError("fair_sampling_probe: need one joint response per setting");
  auto gamma = [&](std::size_t s) -> const synth::JointResponse& {
    return gammas[gammas.size() == 1 ? 0 : s];
  };
  std::vector<synth::PrimedTable> tables;
  for (std::size_t s = 0; s < settings.size(); ++s)
    tables.push_back(synth::integrate_primed(
        optics::configured(network, settings[s].phi_a, settings[s].phi_b), gamma(s), port_i, port_j, opt));
  FairSamplingProbe out;
  out.max_spread = -1.0;
  for (std::size_t k = 0; k < opt.bank_size; ++k) {
    std::size_t hi = 0, lo = 0;
    for (std::size_t s = 1; s < settings.size(); ++s) {
      if (tables[s].value[k] > tables[hi].value[k]) hi = s;
      if (tables[s].value[k] < tables[lo].value[k]) lo = s;
    }
    const double spread = tables[hi].value[k] - tables[lo].value[k];
    if (spread > out.max_spread) {
      out.max_spread = spread;
      out.spread_se = std::hypot(tables[hi].se[k], tables[lo].se[k]);
      out.bank_index = k;
      out.setting_hi = hi;
      out.setting_lo = lo;
    }
  }
  // Confirmation: recompute the selected cell with independent device draws.
  synth::PrimedOptions confirm = opt;
  const auto w = CounterStream(opt.seed, streams::kConfirm).words(0, 0);
  confirm.device_seed = w[0] | (static_cast<std::uint64_t>(w[1]) << 32);
  confirm.bank_begin = out.bank_index;
  confirm.bank_size = out.bank_index + 1;
  auto eval = [&](std::size_t s) {
    const auto& st = settings[s];
    const auto t = synth::integrate_primed(optics::configured(network, st.phi_a, st.phi_b), gamma(s),
                                           port_i, port_j, confirm);
    return std::make_pair(t.value[out.bank_index], t.se[out.bank_index]);
  };
  if (out.setting_hi != out.setting_lo) {
    const auto h = eval(out.setting_hi), l = eval(out.setting_lo);
    out.confirmed_spread = h.first - l.first;
    out.confirmed_se = std::hypot(h.second, l.second);
  }
  return out;
}

struct EnhancementWitness {
  std::size_t bank_index = 0;
  double with_analyzer = 0.0;
  double without_analyzer = 0.0;
  double margin = 0.0;
  double se = 0.0;
};

/// Bank cells where the analyzer raises the detection probability:
/// f_hat'(phi, alpha_s) - f_hat'(inf, alpha_s) > 0 by more than 4 SE.
/// An unset phi compares the bare configuration with itself.
inline std::vector<EnhancementWitness> enhancement_probe(const optics::OpticalNetwork& network,
                                                         const synth::ResponseFunction& f,
                                                         std::size_t port, std::optional<double> phi,
                                                         const synth::PrimedOptions& opt) {
  require(port < network.ports.size(), "enhancement_probe: port out of range");
  const Side side = network.ports[port].side;
  const auto bare = optics::without_analyzer(network, side);
  const auto without = synth::integrate_primed(bare, f, port, opt);
  const auto with =
      phi ? synth::integrate_primed(optics::configured(network, side == Side::A ? *phi : 0.0,
                                                       side == Side::B ? *phi : 0.0),
                                    f, port, opt)
          : without;
  std::vector<EnhancementWitness> out;
  for (std::size_t k = 0; k < opt.bank_size; ++k) {
    const double margin = with.value[k] - without.value[k];
    const double se = std::hypot(with.se[k], without.se[k]);
    if (margin > 0.0 && margin > 4.0 * se)
      out.push_back({k, with.value[k], without.value[k], margin, se});
  }
  return out;
}

}  // namespace zpfsim::bell
