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

// Discrete local-hidden-variable models: determinism, Clauser-Horne
// factorability, augmentation of an indeterministic model to a
// deterministic one over gamma = (lambda, mu), and the search for
// independent local noise xi_A, xi_B that explains a joint table.
//
// Everything here is exact summation over finite supports in double
// precision; comparisons use kTolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zpfsim/errors.hpp"
#include "zpfsim/lp.hpp"

namespace zpfsim::foundations {

inline constexpr double kTolerance = 1e-12;
inline constexpr std::size_t kDefaultSupportBound = 4;
/// Largest number of deterministic assignments enumerated per side.
inline constexpr std::uint64_t kMaxAssignments = std::uint64_t{1} << 20;

struct Measurement {
  std::string name;
  std::vector<double> outcomes;  ///< e.g. {+1, -1}
};

/// P(first = a, second = b | lambda), one matrix per lambda.
struct JointTable {
  std::size_t first = 0;
  std::size_t second = 1;
  std::vector<Eigen::MatrixXd> p;
};

/// Responses written as M_i(lambda, xi_i): outcome index per (lambda, xi).
/// With `shared` set both sides read the same variable (xi_A = xi_B = mu)
/// and xi_b is ignored.
struct LocalNoise {
  std::size_t first = 0;
  std::size_t second = 1;
  std::vector<double> xi_a;
  std::vector<double> xi_b;
  std::vector<std::vector<std::size_t>> a;  ///< [lambda][xi_a]
  std::vector<std::vector<std::size_t>> b;  ///< [lambda][xi_b]
  bool shared = false;
};

struct DiscreteLhvModel {
  std::string name;
  std::vector<std::string> lambda_labels;
  std::vector<double> rho;
  std::vector<Measurement> measurements;
  /// P(M_m = outcome k | lambda) as response[m][lambda][k].
  std::vector<std::vector<std::vector<double>>> response;
  std::vector<JointTable> joints;
  std::optional<LocalNoise> noise;

  std::size_t lambdas() const noexcept { return rho.size(); }

  void validate() const;
};

namespace detail {

inline bool is_probability(double v) { return v >= -kTolerance && v <= 1.0 + kTolerance; }

inline void check_row(const std::vector<double>& row, const std::string& what) {
  double s = 0.0;
  for (double v : row) {
    if (!is_probability(v)) throw ConfigError(what + ": entry outside [0,1]");
    s += v;
  }
  if (std::abs(s - 1.0) > kTolerance) throw ConfigError(what + ": probabilities do not sum to 1");
}

inline std::string cell_name(const DiscreteLhvModel& m, std::size_t lambda) {
  return lambda < m.lambda_labels.size() ? m.lambda_labels[lambda] : "lambda" + std::to_string(lambda);
}

}  // namespace detail

inline void DiscreteLhvModel::validate() const {
  if (rho.empty()) throw ConfigError("model '" + name + "': empty lambda support");
  if (!lambda_labels.empty() && lambda_labels.size() != rho.size())
    throw ConfigError("model '" + name + "': lambda labels and probabilities differ in length");
  detail::check_row(rho, "model '" + name + "' rho");
  if (measurements.empty()) throw ConfigError("model '" + name + "': no measurements");
  if (response.size() != measurements.size())
    throw ConfigError("model '" + name + "': response tables missing");
  for (std::size_t m = 0; m < measurements.size(); ++m) {
    if (measurements[m].outcomes.size() < 2)
      throw ConfigError("measurement '" + measurements[m].name + "' needs at least two outcomes");
    if (response[m].size() != lambdas())
      throw ConfigError("measurement '" + measurements[m].name + "': one response row per lambda required");
    for (std::size_t l = 0; l < lambdas(); ++l) {
      if (response[m][l].size() != measurements[m].outcomes.size())
        throw ConfigError("measurement '" + measurements[m].name + "': response row length mismatch");
      detail::check_row(response[m][l], "response of " + measurements[m].name + " at " + detail::cell_name(*this, l));
    }
  }
  std::vector<int> used(measurements.size(), 0);
  for (const auto& j : joints) {
    if (j.first >= measurements.size() || j.second >= measurements.size() || j.first == j.second)
      throw ConfigError("joint table refers to an unknown measurement pair");
    ++used[j.first];
    ++used[j.second];
    if (j.p.size() != lambdas()) throw ConfigError("joint table: one matrix per lambda required");
    const auto ka = static_cast<Eigen::Index>(measurements[j.first].outcomes.size());
    const auto kb = static_cast<Eigen::Index>(measurements[j.second].outcomes.size());
    for (std::size_t l = 0; l < lambdas(); ++l) {
      const auto& t = j.p[l];
      if (t.rows() != ka || t.cols() != kb) throw ConfigError("joint table: shape mismatch");
      std::vector<double> flat(t.data(), t.data() + t.size());
      detail::check_row(flat, "joint table at " + detail::cell_name(*this, l));
      for (Eigen::Index a = 0; a < ka; ++a)
        if (std::abs(t.row(a).sum() - response[j.first][l][static_cast<std::size_t>(a)]) > kTolerance)
          throw ConfigError("joint table at " + detail::cell_name(*this, l) + " disagrees with the marginal of " +
                            measurements[j.first].name);
      for (Eigen::Index b = 0; b < kb; ++b)
        if (std::abs(t.col(b).sum() - response[j.second][l][static_cast<std::size_t>(b)]) > kTolerance)
          throw ConfigError("joint table at " + detail::cell_name(*this, l) + " disagrees with the marginal of " +
                            measurements[j.second].name);
    }
  }
  for (std::size_t m = 0; m < used.size(); ++m)
    if (used[m] > 1)
      throw UnsupportedError("measurement '" + measurements[m].name + "' appears in more than one joint table");
}

/// Fills the response tables of measurements covered by a joint table but
/// given no explicit marginal.
inline void complete_marginals(DiscreteLhvModel& m) {
  m.response.resize(m.measurements.size());
  for (const auto& j : m.joints) {
    for (int side = 0; side < 2; ++side) {
      const std::size_t idx = side == 0 ? j.first : j.second;
      if (!m.response[idx].empty()) continue;
      m.response[idx].resize(j.p.size());
      for (std::size_t l = 0; l < j.p.size(); ++l) {
        const Eigen::VectorXd v = side == 0 ? Eigen::VectorXd(j.p[l].rowwise().sum())
                                            : Eigen::VectorXd(j.p[l].colwise().sum().transpose());
        m.response[idx][l].assign(v.data(), v.data() + v.size());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Determinism

struct ResponseCell {
  std::size_t lambda = 0;
  std::size_t measurement = 0;
  std::size_t outcome = 0;
  double value = 0.0;
};

struct DeterminismReport {
  bool deterministic = true;
  std::optional<ResponseCell> first_indeterministic;
};

inline DeterminismReport is_deterministic(const DiscreteLhvModel& model) {
  model.validate();
  DeterminismReport r;
  for (std::size_t m = 0; m < model.measurements.size(); ++m)
    for (std::size_t l = 0; l < model.lambdas(); ++l)
      for (std::size_t k = 0; k < model.response[m][l].size(); ++k) {
        const double v = model.response[m][l][k];
        if (std::abs(v) > kTolerance && std::abs(v - 1.0) > kTolerance) {
          r.deterministic = false;
          r.first_indeterministic = ResponseCell{l, m, k, v};
          return r;
        }
      }
  return r;
}

// ---------------------------------------------------------------------------
// Factorability

struct Witness {
  std::size_t lambda = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  double joint = 0.0;
  double product = 0.0;

  double violation() const { return std::abs(joint - product); }
};

namespace detail {

// Every cell where P(a,b|lambda) differs from P(a|lambda) P(b|lambda).
inline std::vector<Witness> ch_witnesses(const DiscreteLhvModel& m, double tol, double& worst) {
  std::vector<Witness> out;
  worst = 0.0;
  for (const auto& j : m.joints)
    for (std::size_t l = 0; l < m.lambdas(); ++l)
      for (std::size_t a = 0; a < m.measurements[j.first].outcomes.size(); ++a)
        for (std::size_t b = 0; b < m.measurements[j.second].outcomes.size(); ++b) {
          Witness w{l, j.first, j.second, a, b,
                    j.p[l](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                    m.response[j.first][l][a] * m.response[j.second][l][b]};
          worst = std::max(worst, w.violation());
          if (w.violation() > tol) out.push_back(w);
        }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Augmentation to determinism

/// Deterministic model over gamma = (lambda, mu). mu is the unit interval
/// cut at the cumulative response probabilities of each lambda; each piece
/// becomes one gamma with weight rho(lambda) * length.
struct AugmentedModel {
  DiscreteLhvModel model;
  std::vector<std::size_t> origin;           ///< lambda index of each gamma
  std::vector<double> mu_weight;             ///< P(mu | lambda) of each gamma
  std::vector<std::vector<double>> cuts;     ///< interior breakpoints per lambda
};

inline AugmentedModel augment_to_deterministic(const DiscreteLhvModel& model) {
  model.validate();
  const std::size_t M = model.measurements.size();
  // Groups of measurements sharing one cumulative partition: each joint pair,
  // then every measurement not in a joint on its own.
  struct Group {
    std::optional<std::size_t> joint;
    std::size_t measurement = 0;
  };
  std::vector<Group> groups;
  std::vector<bool> covered(M, false);
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    groups.push_back({j, 0});
    covered[model.joints[j].first] = covered[model.joints[j].second] = true;
  }
  for (std::size_t m = 0; m < M; ++m)
    if (!covered[m]) groups.push_back({std::nullopt, m});

  auto cumulative = [&](const Group& g, std::size_t l) {
    std::vector<double> c;
    double acc = 0.0;
    if (g.joint) {
      const auto& t = model.joints[*g.joint].p[l];
      for (Eigen::Index a = 0; a < t.rows(); ++a)
        for (Eigen::Index b = 0; b < t.cols(); ++b) c.push_back(acc += t(a, b));
    } else {
      for (double v : model.response[g.measurement][l]) c.push_back(acc += v);
    }
    c.back() = 1.0;
    return c;
  };

  AugmentedModel out;
  DiscreteLhvModel& g = out.model;
  g.name = model.name + "+mu";
  g.measurements = model.measurements;
  g.response.assign(M, {});
  g.joints = model.joints;
  for (auto& j : g.joints) j.p.clear();
  out.cuts.resize(model.lambdas());

  for (std::size_t l = 0; l < model.lambdas(); ++l) {
    std::vector<std::vector<double>> cums;
    std::vector<double> cuts;
    for (const auto& grp : groups) {
      cums.push_back(cumulative(grp, l));
      for (double c : cums.back())
        if (c > 0.0 && c < 1.0) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    out.cuts[l] = cuts;
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(1.0);
    std::size_t piece = 0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double len = edges[e + 1] - edges[e];
      if (!(len > 0.0)) continue;
      const double mid = 0.5 * (edges[e] + edges[e + 1]);
      out.origin.push_back(l);
      out.mu_weight.push_back(len);
      g.rho.push_back(model.rho[l] * len);
      g.lambda_labels.push_back(detail::cell_name(model, l) + "/mu" + std::to_string(++piece));
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& c = cums[gi];
        const std::size_t hit = static_cast<std::size_t>(
            std::upper_bound(c.begin(), c.end(), mid) - c.begin());
        const std::size_t cell = std::min(hit, c.size() - 1);
        if (groups[gi].joint) {
          const auto& src = model.joints[*groups[gi].joint];
          const auto kb = model.measurements[src.second].outcomes.size();
          const std::size_t a = cell / kb, b = cell % kb;
          Eigen::MatrixXd t = Eigen::MatrixXd::Zero(src.p[l].rows(), src.p[l].cols());
          t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
          g.joints[*groups[gi].joint].p.push_back(t);
          std::vector<double> ra(model.measurements[src.first].outcomes.size(), 0.0);
          std::vector<double> rb(kb, 0.0);
          ra[a] = rb[b] = 1.0;
          g.response[src.first].push_back(ra);
          g.response[src.second].push_back(rb);
        } else {
          std::vector<double> r(model.measurements[groups[gi].measurement].outcomes.size(), 0.0);
          r[cell] = 1.0;
          g.response[groups[gi].measurement].push_back(r);
        }
      }
    }
  }
  // Pieces carry rho(lambda) * length, which sums to 1 only up to rounding.
  double total = 0.0;
  for (double v : g.rho) total += v;
  for (double& v : g.rho) v /= total;
  return out;
}

/// Sums mu back out: P(. | lambda) = sum over gamma of P(mu | lambda) P(. | gamma).
inline DiscreteLhvModel marginalize(const AugmentedModel& aug, const DiscreteLhvModel& original) {
  DiscreteLhvModel m = original;
  for (auto& per_m : m.response)
    for (auto& row : per_m) std::fill(row.begin(), row.end(), 0.0);
  for (auto& j : m.joints)
    for (auto& t : j.p) t.setZero();
  for (std::size_t gi = 0; gi < aug.origin.size(); ++gi) {
    const std::size_t l = aug.origin[gi];
    const double w = aug.mu_weight[gi];
    for (std::size_t k = 0; k < m.measurements.size(); ++k)
      for (std::size_t o = 0; o < m.response[k][l].size(); ++o) m.response[k][l][o] += w * aug.model.response[k][gi][o];
    for (std::size_t j = 0; j < m.joints.size(); ++j) m.joints[j].p[l] += w * aug.model.joints[j].p[gi];
  }
  return m;
}

/// Largest absolute difference between the tables of two models of equal shape.
inline double max_table_difference(const DiscreteLhvModel& x, const DiscreteLhvModel& y) {
  require(x.response.size() == y.response.size() && x.joints.size() == y.joints.size(),
          "max_table_difference: shape mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < x.response.size(); ++k)
    for (std::size_t l = 0; l < x.response[k].size(); ++l)
      for (std::size_t o = 0; o < x.response[k][l].size(); ++o)
        d = std::max(d, std::abs(x.response[k][l][o] - y.response[k][l][o]));
  for (std::size_t j = 0; j < x.joints.size(); ++j)
    for (std::size_t l = 0; l < x.joints[j].p.size(); ++l)
      d = std::max(d, (x.joints[j].p[l] - y.joints[j].p[l]).cwiseAbs().maxCoeff());
  return d;
}

struct FactorabilityVerdict {
  bool deterministic_on_lambda = false;
  bool ch_factorable_on_lambda = false;
  bool gamma_factorable = false;
  double worst_violation = 0.0;
  std::vector<Witness> witnesses;  ///< cells violating factorability on lambda
  AugmentedModel gamma;            ///< the gamma = lambda + mu model behind gamma_factorable
};

inline FactorabilityVerdict check_ch_factorability(const DiscreteLhvModel& model, double tolerance = kTolerance) {
  model.validate();
  if (model.joints.empty()) throw ConfigError("check_ch_factorability: model has no joint table");
  FactorabilityVerdict v;
  v.deterministic_on_lambda = is_deterministic(model).deterministic;
  v.witnesses = detail::ch_witnesses(model, tolerance, v.worst_violation);
  v.ch_factorable_on_lambda = v.witnesses.empty();
  v.gamma = augment_to_deterministic(model);
  double gamma_worst = 0.0;
  v.gamma_factorable = detail::ch_witnesses(v.gamma.model, tolerance, gamma_worst).empty();
  return v;
}

// ---------------------------------------------------------------------------
// Local noise and lambda-factorability

/// Integrates independent (or shared) local noise out of M_i(lambda, xi_i).
inline DiscreteLhvModel integrate_local_noise(DiscreteLhvModel base, const LocalNoise& noise) {
  const std::size_t L = base.lambdas();
  require(noise.first < base.measurements.size() && noise.second < base.measurements.size(),
          "integrate_local_noise: unknown measurement");
  const auto& xb = noise.shared ? noise.xi_a : noise.xi_b;
  detail::check_row(noise.xi_a, "xi_a weights");
  detail::check_row(xb, "xi_b weights");
  if (noise.a.size() != L || noise.b.size() != L)
    throw ConfigError("local noise: one assignment row per lambda required");
  const auto ka = base.measurements[noise.first].outcomes.size();
  const auto kb = base.measurements[noise.second].outcomes.size();
  base.response.resize(base.measurements.size());
  base.response[noise.first].assign(L, std::vector<double>(ka, 0.0));
  base.response[noise.second].assign(L, std::vector<double>(kb, 0.0));
  JointTable j{noise.first, noise.second, {}};
  for (std::size_t l = 0; l < L; ++l) {
    if (noise.a[l].size() != noise.xi_a.size() || noise.b[l].size() != xb.size())
      throw ConfigError("local noise: assignment row length mismatch");
    for (auto o : noise.a[l])
      if (o >= ka) throw ConfigError("local noise: outcome index out of range");
    for (auto o : noise.b[l])
      if (o >= kb) throw ConfigError("local noise: outcome index out of range");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ka), static_cast<Eigen::Index>(kb));
    if (noise.shared) {
      for (std::size_t x = 0; x < noise.xi_a.size(); ++x)
        t(static_cast<Eigen::Index>(noise.a[l][x]), static_cast<Eigen::Index>(noise.b[l][x])) += noise.xi_a[x];
    } else {
      for (std::size_t x = 0; x < noise.xi_a.size(); ++x)
        for (std::size_t y = 0; y < xb.size(); ++y)
          t(static_cast<Eigen::Index>(noise.a[l][x]), static_cast<Eigen::Index>(noise.b[l][y])) +=
              noise.xi_a[x] * xb[y];
    }
    for (std::size_t o = 0; o < ka; ++o) base.response[noise.first][l][o] = t.row(static_cast<Eigen::Index>(o)).sum();
    for (std::size_t o = 0; o < kb; ++o) base.response[noise.second][l][o] = t.col(static_cast<Eigen::Index>(o)).sum();
    j.p.push_back(std::move(t));
  }
  base.joints.erase(std::remove_if(base.joints.begin(), base.joints.end(),
                                   [&](const JointTable& x) {
                                     return x.first == noise.first || x.second == noise.first ||
                                            x.first == noise.second || x.second == noise.second;
                                   }),
                    base.joints.end());
  base.joints.push_back(std::move(j));
  base.noise = noise;
  return base;
}

enum class LambdaClass { Factorisable, NonFactorisable, Undecided };

inline const char* lambda_class_name(LambdaClass c) {
  switch (c) {
    case LambdaClass::Factorisable: return "lambda-factorisable";
    case LambdaClass::NonFactorisable: return "non-lambda-factorisable";
    case LambdaClass::Undecided: return "undecided at this scale";
  }
  return "?";
}

struct Classification {
  LambdaClass verdict = LambdaClass::Undecided;
  std::optional<LocalNoise> construction;  ///< independent xi_A, xi_B reproducing the tables
  std::optional<Witness> obstruction;      ///< a cell no independent noise can reproduce
  std::uint64_t assignments_checked = 0;
  std::size_t support_bound = kDefaultSupportBound;
  std::string note;
};

namespace detail {

// Weights on a support of size n that reproduce P(outcome | lambda) for every
// lambda through some deterministic assignment. Enumerates assignments in
// lexicographic order and solves the linear system in the weights.
inline std::optional<std::pair<std::vector<double>, std::vector<std::vector<std::size_t>>>> local_side_search(
    const std::vector<std::vector<double>>& marg, std::size_t n, std::uint64_t& checked) {
  const std::size_t L = marg.size(), K = marg[0].size();
  const std::size_t slots = L * n;
  std::vector<std::size_t> assign(slots, 0);
  for (;;) {
    ++checked;
    lp::Problem p;
    const auto rows = static_cast<Eigen::Index>(1 + L * (K - 1));
    p.A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(n));
    p.b = Eigen::VectorXd::Zero(rows);
    p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    p.kinds.assign(static_cast<std::size_t>(rows), lp::RowKind::Equal);
    p.A.row(0).setOnes();
    p.b(0) = 1.0;
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t k = 0; k + 1 < K; ++k) {
        const auto r = static_cast<Eigen::Index>(1 + l * (K - 1) + k);
        for (std::size_t x = 0; x < n; ++x)
          if (assign[l * n + x] == k) p.A(r, static_cast<Eigen::Index>(x)) = 1.0;
        p.b(r) = marg[l][k];
      }
    const auto res = lp::solve(p);
    if (res.status == lp::Status::Optimal) {
      std::vector<double> w(res.x.data(), res.x.data() + res.x.size());
      std::vector<std::vector<std::size_t>> map(L, std::vector<std::size_t>(n));
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t x = 0; x < n; ++x) map[l][x] = assign[l * n + x];
      return std::make_pair(w, map);
    }
    std::size_t i = 0;
    while (i < slots && ++assign[i] == K) assign[i++] = 0;
    if (i == slots) return std::nullopt;
  }
}

// Inverse-CDF construction: xi uniform on [0,1) cut at every cumulative
// marginal of every lambda.
inline std::pair<std::vector<double>, std::vector<std::vector<std::size_t>>> cdf_construction(
    const std::vector<std::vector<double>>& marg) {
  std::vector<double> cuts;
  std::vector<std::vector<double>> cums;
  for (const auto& row : marg) {
    std::vector<double> c;
    double acc = 0.0;
    for (double v : row) c.push_back(acc += v);
    c.back() = 1.0;
    for (double v : c)
      if (v > 0.0 && v < 1.0) cuts.push_back(v);
    cums.push_back(std::move(c));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(1.0);
  std::vector<double> w;
  std::vector<std::vector<std::size_t>> map(marg.size());
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    w.push_back(edges[e + 1] - edges[e]);
    const double mid = 0.5 * (edges[e] + edges[e + 1]);
    for (std::size_t l = 0; l < marg.size(); ++l) {
      const auto& c = cums[l];
      const auto hit = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), mid) - c.begin());
      map[l].push_back(std::min(hit, c.size() - 1));
    }
  }
  return {w, map};
}

inline std::uint64_t assignment_count(std::size_t K, std::size_t slots) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < slots; ++i) {
    if (n > kMaxAssignments / K) return kMaxAssignments + 1;
    n *= K;
  }
  return n;
}

}  // namespace detail

/// Decides whether independent xi_A, xi_B (independent of lambda too) with
/// deterministic M_i(lambda, xi_i) reproduce the model's joint table.
///
/// Independent local noise always integrates to a product table, so a
/// factorability violation rules out every construction at every support
/// size. Otherwise a construction is sought with supports up to
/// `support_bound`; if none is found in that range the verdict is undecided.
inline Classification classify_lambda_factorisable(const DiscreteLhvModel& model,
                                                   std::size_t support_bound = kDefaultSupportBound) {
  model.validate();
  if (model.joints.size() != 1)
    throw ConfigError("classify_lambda_factorisable: model needs exactly one joint table");
  Classification c;
  c.support_bound = support_bound;
  const auto& jt = model.joints[0];

  if (model.noise && !model.noise->shared) {
    c.verdict = LambdaClass::Factorisable;
    c.construction = model.noise;
    c.note = "responses are given as M_i(lambda, xi_i) with independent xi";
    return c;
  }
  double worst = 0.0;
  auto w = detail::ch_witnesses(model, kTolerance, worst);
  if (!w.empty()) {
    c.verdict = LambdaClass::NonFactorisable;
    c.obstruction = *std::max_element(w.begin(), w.end(),
                                      [](const Witness& x, const Witness& y) { return x.violation() < y.violation(); });
    c.note = "independent local noise integrates to a product table; this cell is not one";
    // Exhaust the assignments that reproduce each side's marginals: every one
    // of them yields the product at the obstruction cell.
    for (std::size_t n = 1; n <= support_bound; ++n) {
      const auto slots = model.lambdas() * n;
      if (detail::assignment_count(model.measurements[jt.first].outcomes.size(), slots) > kMaxAssignments ||
          detail::assignment_count(model.measurements[jt.second].outcomes.size(), slots) > kMaxAssignments)
        break;
      detail::local_side_search(model.response[jt.first], n, c.assignments_checked);
      detail::local_side_search(model.response[jt.second], n, c.assignments_checked);
    }
    return c;
  }

  LocalNoise noise;
  noise.first = jt.first;
  noise.second = jt.second;
  auto side = [&](std::size_t m) -> std::optional<std::pair<std::vector<double>, std::vector<std::vector<std::size_t>>>> {
    auto cdf = detail::cdf_construction(model.response[m]);
    if (cdf.first.size() <= support_bound) return cdf;
    for (std::size_t n = 1; n <= support_bound; ++n) {
      if (detail::assignment_count(model.measurements[m].outcomes.size(), model.lambdas() * n) > kMaxAssignments)
        return std::nullopt;
      if (auto found = detail::local_side_search(model.response[m], n, c.assignments_checked)) return found;
    }
    return std::nullopt;
  };
  auto sa = side(jt.first);
  auto sb = sa ? side(jt.second) : std::nullopt;
  if (!sa || !sb) {
    c.verdict = LambdaClass::Undecided;
    c.note = "no construction with supports up to " + std::to_string(support_bound);
    return c;
  }
  noise.xi_a = std::move(sa->first);
  noise.a = std::move(sa->second);
  noise.xi_b = std::move(sb->first);
  noise.b = std::move(sb->second);
  // Check the construction against the model before reporting it.
  DiscreteLhvModel rebuilt = integrate_local_noise(model, noise);
  if (max_table_difference(rebuilt, model) > 1e-9) {
    c.verdict = LambdaClass::Undecided;
    c.note = "construction failed re-integration check";
    return c;
  }
  c.verdict = LambdaClass::Factorisable;
  c.construction = std::move(noise);
  c.note = "independent xi from inverse-CDF thresholds";
  return c;
}

// ---------------------------------------------------------------------------
// Bundled reference models

namespace models {

inline DiscreteLhvModel binary_pair(std::string name, std::vector<double> rho) {
  DiscreteLhvModel m;
  m.name = std::move(name);
  m.rho = std::move(rho);
  for (std::size_t l = 0; l < m.rho.size(); ++l) m.lambda_labels.push_back("lambda" + std::to_string(l));
  m.measurements = {{"A", {+1.0, -1.0}}, {"B", {+1.0, -1.0}}};
  return m;
}

/// One lambda on which A = B = +1 or A = B = -1 with equal probability.
inline DiscreteLhvModel counterexample() {
  auto m = binary_pair("counterexample", {1.0});
  Eigen::MatrixXd t(2, 2);
  t << 0.5, 0.0, 0.0, 0.5;
  m.joints.push_back({0, 1, {t}});
  complete_marginals(m);
  return m;
}

}  // namespace models

}  // namespace zpfsim::foundations
