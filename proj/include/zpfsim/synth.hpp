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

// Detector-response synthesis.
//
// Given Monte Carlo intensity records with weights w_k and a target
// probability P, find a tabulated f with 0 <= f <= 1 and sum_k w_k f(I_k) = P.
// A constant f = P always works; shaped templates (dead zone, linear ramp,
// saturation) are solved by bisection on their single scale parameter.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "zpfsim/errors.hpp"
#include "zpfsim/optics.hpp"
#include "zpfsim/parallel.hpp"

namespace zpfsim::synth {

inline constexpr std::size_t kDefaultBins = 64;
inline constexpr double kResidualTolerance = 1e-9;
inline constexpr double kScaleTolerance = 1e-12;

/// Weighted intensity records. `second` is only used for joint synthesis.
struct IntensitySamples {
  std::vector<double> weight;
  std::vector<double> first;
  std::vector<double> second;

  std::size_t size() const noexcept { return first.size(); }

  static IntensitySamples uniform(std::vector<double> first, std::vector<double> second = {}) {
    IntensitySamples s;
    const double w = first.empty() ? 0.0 : 1.0 / static_cast<double>(first.size());
    s.weight.assign(first.size(), w);
    s.first = std::move(first);
    s.second = std::move(second);
    return s;
  }

  void validate(bool joint) const {
    if (first.empty()) throw ConfigError("intensity samples are empty");
    if (weight.size() != first.size()) throw ContractViolation("weights and intensities differ in length");
    if (joint && second.size() != first.size())
      throw ContractViolation("joint synthesis needs paired intensities");
    double total = 0.0;
    for (double w : weight) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("sample weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("sample weights must be normalized");
    for (double x : first)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("intensities must be nonnegative");
    for (double x : second)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("intensities must be nonnegative");
  }
};

struct SynthesisTarget {
  double K_m = 0.0;
  double K_j = 0.0;
  double marginal = 0.0;  ///< P_s
  double joint = 0.0;     ///< P_jj
  double marginal_se = 0.0;
  double joint_se = 0.0;

  /// Targets clipped into [0,1] for synthesis. Raw estimates may stray
  /// outside by Monte Carlo noise (e.g. vacuum-only input).
  double marginal_clamped() const { return std::clamp(marginal, 0.0, 1.0); }
  double joint_clamped() const { return std::clamp(joint, 0.0, 1.0); }
};

namespace detail {
// Rejects a target outside [0,1] by more than four standard errors.
inline void check_probability(double p, double se, const std::string& what) {
  if (!(p >= -4.0 * se && p <= 1.0 + 4.0 * se))
    throw CalibrationError(what + " = " + std::to_string(p) +
                           " lies outside [0,1]: constants K out of calibrated range");
}

inline double effective_se(const std::vector<double>& w, const std::vector<double>& x, double mean) {
  double var = 0.0, w2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    var += w[k] * (x[k] - mean) * (x[k] - mean);
    w2 += w[k] * w[k];
  }
  return std::sqrt(std::max(var, 0.0) * w2);
}
}  // namespace detail

/// P_s = K_m sum_k w_k (I_k - I0_i); P_jj = K_j sum_k w_k (I_ik - I0_i)(I_jk - I0_j).
/// The joint target is only formed when `second` is present.
inline SynthesisTarget empirical_targets(const IntensitySamples& s, double i0_first,
                                         double i0_second, double K_m, double K_j) {
  const bool joint = !s.second.empty();
  s.validate(joint);
  SynthesisTarget t;
  t.K_m = K_m;
  t.K_j = K_j;
  std::vector<double> excess(s.size()), product;
  double m = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    excess[k] = s.first[k] - i0_first;
    m += s.weight[k] * excess[k];
  }
  t.marginal = K_m * m;
  t.marginal_se = K_m * detail::effective_se(s.weight, excess, m);
  detail::check_probability(t.marginal, t.marginal_se, "marginal target");
  if (joint) {
    product.resize(s.size());
    double j = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      product[k] = excess[k] * (s.second[k] - i0_second);
      j += s.weight[k] * product[k];
    }
    t.joint = K_j * j;
    t.joint_se = K_j * detail::effective_se(s.weight, product, j);
    detail::check_probability(t.joint, t.joint_se, "joint target");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Grids

/// Weighted empirical-quantile edges: bins+1 ascending values spanning the
/// sample range. Interior edges sit midway between neighbouring samples.
inline std::vector<double> quantile_edges(const std::vector<double>& values,
                                          const std::vector<double>& weights, std::size_t bins) {
  require(!values.empty() && values.size() == weights.size(), "quantile_edges: bad samples");
  require(bins >= 1, "quantile_edges: need at least one bin");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> edges(bins + 1);
  edges.front() = values[order.front()];
  edges.back() = values[order.back()];
  double cum = 0.0;
  std::size_t k = 0;
  for (std::size_t b = 1; b < bins; ++b) {
    const double level = total * static_cast<double>(b) / static_cast<double>(bins);
    while (k < order.size() && cum + weights[order[k]] <= level) cum += weights[order[k++]];
    if (k == 0)
      edges[b] = edges.front();
    else if (k >= order.size())
      edges[b] = edges.back();
    else
      edges[b] = 0.5 * (values[order[k - 1]] + values[order[k]]);
    edges[b] = std::max(edges[b], edges[b - 1]);
  }
  return edges;
}

/// Bin index of x; values outside the grid fall into the end bins.
inline std::size_t bin_of(const std::vector<double>& edges, double x) {
  const std::size_t bins = edges.size() - 1;
  if (bins <= 1) return 0;
  const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, x);
  return static_cast<std::size_t>(it - (edges.begin() + 1));
}

// ---------------------------------------------------------------------------
// Responses

enum class TemplateKind { Constant, DeadLinearSaturate, Fixed };

inline const char* template_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Constant: return "constant";
    case TemplateKind::DeadLinearSaturate: return "dead-linear-saturate";
    case TemplateKind::Fixed: return "fixed";
  }
  return "?";
}

struct ResponseTemplate {
  TemplateKind kind = TemplateKind::Constant;
  double threshold = 0.0;         ///< dead zone below this intensity
  double threshold_second = -1;   ///< joint only; negative means "same as threshold"
  double cap = 1.0;               ///< saturation level
  double value = 0.0;             ///< Fixed only
  std::size_t bins = kDefaultBins;

  double second_threshold() const { return threshold_second < 0 ? threshold : threshold_second; }

  void validate() const {
    if (!(cap > 0.0 && cap <= 1.0)) throw ConfigError("template cap must lie in (0,1]");
    if (!(threshold >= 0.0)) throw ConfigError("template threshold must be nonnegative");
    if (kind == TemplateKind::Fixed && !(value >= 0.0 && value <= 1.0))
      throw ConfigError("fixed response value must lie in [0,1]");
    if (bins < 1) throw ConfigError("template needs at least one bin");
  }
};

struct ResponseFunction {
  std::vector<double> edges;
  std::vector<double> values;
  ResponseTemplate shape;
  double scale = 0.0;  ///< solved slope (shaped templates)
  double target = 0.0;
  double residual = 0.0;
  bool fallback = false;  ///< shaped template infeasible; constant used instead

  double operator()(double intensity) const { return values[bin_of(edges, intensity)]; }

  static ResponseFunction constant(double value, TemplateKind kind = TemplateKind::Constant) {
    ResponseFunction f;
    f.edges = {0.0, std::numeric_limits<double>::infinity()};
    f.values = {value};
    f.shape.kind = kind;
    f.shape.value = value;
    f.target = value;
    return f;
  }
};

struct JointResponse {
  std::vector<double> edges_i;
  std::vector<double> edges_j;
  std::vector<double> values;  ///< row-major, rows follow edges_i
  ResponseTemplate shape;
  double scale = 0.0;
  double target = 0.0;
  double residual = 0.0;
  bool fallback = false;

  std::size_t cols() const { return edges_j.size() - 1; }

  double operator()(double ii, double ij) const {
    return values[bin_of(edges_i, ii) * cols() + bin_of(edges_j, ij)];
  }

  static JointResponse constant(double value, TemplateKind kind = TemplateKind::Constant) {
    JointResponse g;
    g.edges_i = g.edges_j = {0.0, std::numeric_limits<double>::infinity()};
    g.values = {value};
    g.shape.kind = kind;
    g.shape.value = value;
    g.target = value;
    return g;
  }
};

/// Result of solving sum_b W_b min(cap, s h_b) = P for the scale s.
struct ScaleSolution {
  double scale = 0.0;
  bool feasible = true;
};

/// Leftmost s with g(s) = P, where g is the nondecreasing piecewise-linear
/// map above. Bisection to kScaleTolerance, then an exact solve on the
/// linear piece that contains the root.
inline ScaleSolution solve_scale(const std::vector<double>& W, const std::vector<double>& h,
                                 double cap, double P) {
  auto g = [&](double s) {
    double acc = 0.0;
    for (std::size_t b = 0; b < W.size(); ++b) acc += W[b] * std::min(cap, s * h[b]);
    return acc;
  };
  if (P <= 0.0) return {0.0, true};
  double hmin = std::numeric_limits<double>::infinity(), reach = 0.0;
  for (std::size_t b = 0; b < W.size(); ++b)
    if (h[b] > 0.0) {
      hmin = std::min(hmin, h[b]);
      reach += W[b] * cap;
    }
  if (reach < P) return {0.0, false};
  double lo = 0.0, hi = cap / hmin;
  if (g(hi) < P) return {0.0, false};  // rounding at the very edge of feasibility
  while (hi - lo > kScaleTolerance * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= P)
      hi = mid;
    else
      lo = mid;
  }
  // On the piece containing hi: g(s) = cap * W_sat + s * sum_{lin} W_b h_b.
  double sat = 0.0, slope = 0.0;
  for (std::size_t b = 0; b < W.size(); ++b) {
    if (h[b] <= 0.0) continue;
    if (hi * h[b] >= cap)
      sat += W[b] * cap;
    else
      slope += W[b] * h[b];
  }
  double best = hi;
  if (slope > 0.0) {
    const double exact = (P - sat) / slope;
    if (exact >= 0.0 && std::abs(g(exact) - P) < std::abs(g(hi) - P)) best = exact;
  }
  return {best, true};
}

namespace detail {
inline double weighted_residual(const std::vector<double>& W, const std::vector<double>& f, double P) {
  double r = 0.0;
  for (std::size_t b = 0; b < W.size(); ++b) r += W[b] * (f[b] - P);
  return std::abs(r);
}
}  // namespace detail

/// Lemma-style construction for one detector. The constant template returns
/// f = P exactly; a shaped template that cannot reach P falls back to it.
inline ResponseFunction synthesize_marginal(double target, const IntensitySamples& samples,
                                            const ResponseTemplate& shape) {
  shape.validate();
  if (!(target >= 0.0 && target <= 1.0))
    throw CalibrationError("marginal target " + std::to_string(target) +
                           " outside [0,1]: synthesis infeasible");
  samples.validate(false);
  if (shape.kind != TemplateKind::DeadLinearSaturate) {
    ResponseFunction f = ResponseFunction::constant(target);
    f.shape = shape;
    f.shape.kind = TemplateKind::Constant;
    return f;
  }

  ResponseFunction f;
  f.shape = shape;
  f.target = target;
  f.edges = quantile_edges(samples.first, samples.weight, shape.bins);
  const std::size_t bins = f.edges.size() - 1;
  std::vector<double> W(bins, 0.0), sum(bins, 0.0), h(bins, 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::size_t b = bin_of(f.edges, samples.first[k]);
    W[b] += samples.weight[k];
    sum[b] += samples.weight[k] * samples.first[k];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double rep = W[b] > 0.0 ? sum[b] / W[b] : 0.5 * (f.edges[b] + f.edges[b + 1]);
    h[b] = std::max(0.0, rep - shape.threshold);
  }
  const ScaleSolution sol = solve_scale(W, h, shape.cap, target);
  f.values.assign(bins, 0.0);
  if (!sol.feasible) {
    f.fallback = true;
    f.values.assign(bins, target);
  } else {
    f.scale = sol.scale;
    for (std::size_t b = 0; b < bins; ++b) f.values[b] = std::min(shape.cap, sol.scale * h[b]);
  }
  f.residual = detail::weighted_residual(W, f.values, target);
  return f;
}

/// Two-dimensional version on the (I_i, I_j) grid; the shaped template is
/// min(cap, s * (I_i - T_i)^+ (I_j - T_j)^+) with the product averaged per cell.
inline JointResponse synthesize_joint(double target, const IntensitySamples& samples,
                                      const ResponseTemplate& shape) {
  shape.validate();
  if (!(target >= 0.0 && target <= 1.0))
    throw CalibrationError("joint target " + std::to_string(target) +
                           " outside [0,1]: synthesis infeasible");
  samples.validate(true);
  if (shape.kind != TemplateKind::DeadLinearSaturate) {
    JointResponse g = JointResponse::constant(target);
    g.shape = shape;
    g.shape.kind = TemplateKind::Constant;
    return g;
  }

  JointResponse g;
  g.shape = shape;
  g.target = target;
  g.edges_i = quantile_edges(samples.first, samples.weight, shape.bins);
  g.edges_j = quantile_edges(samples.second, samples.weight, shape.bins);
  const std::size_t rows = g.edges_i.size() - 1, cols = g.cols();
  std::vector<double> W(rows * cols, 0.0), hsum(rows * cols, 0.0), h(rows * cols, 0.0);
  const double ti = shape.threshold, tj = shape.second_threshold();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::size_t c = bin_of(g.edges_i, samples.first[k]) * cols + bin_of(g.edges_j, samples.second[k]);
    W[c] += samples.weight[k];
    hsum[c] += samples.weight[k] * std::max(0.0, samples.first[k] - ti) *
               std::max(0.0, samples.second[k] - tj);
  }
  for (std::size_t c = 0; c < W.size(); ++c) h[c] = W[c] > 0.0 ? hsum[c] / W[c] : 0.0;
  const ScaleSolution sol = solve_scale(W, h, shape.cap, target);
  if (!sol.feasible) {
    g.fallback = true;
    g.values.assign(W.size(), target);
  } else {
    g.scale = sol.scale;
    g.values.resize(W.size());
    for (std::size_t c = 0; c < W.size(); ++c) g.values[c] = std::min(shape.cap, sol.scale * h[c]);
  }
  g.residual = detail::weighted_residual(W, g.values, target);
  return g;
}

/// sum_k w_k f(I_k) on an arbitrary (e.g. held-out) sample.
inline double expectation(const ResponseFunction& f, const IntensitySamples& s) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += s.weight[k] * f(s.first[k]);
  return acc;
}

inline double expectation(const JointResponse& g, const IntensitySamples& s) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += s.weight[k] * g(s.first[k], s.second[k]);
  return acc;
}

// ---------------------------------------------------------------------------
// Auxiliary variable mu

struct AuxVariableSpec {
  std::vector<double> support;
  std::vector<double> weights;
  bool degenerate_mode = false;

  static AuxVariableSpec two_point(double rho1 = 0.5) {
    return {{0.0, 1.0}, {rho1, 1.0 - rho1}, false};
  }
  static AuxVariableSpec degenerate(double mu0 = 0.0) { return {{mu0}, {1.0}, true}; }

  void validate() const {
    if (support.empty() || support.size() != weights.size())
      throw ConfigError("mu support and weights must be non-empty and equally long");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("mu weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mu weights must sum to 1");
    if (degenerate_mode && support.size() != 1)
      throw ConfigError("degenerate mu needs a single support point");
  }
};

/// One alpha-cell of the tabulated target: Gamma_hat(alpha) and the two
/// marginals it must stay consistent with.
struct MuCell {
  double gamma = 0.0;
  double f_i = 0.0;
  double f_j = 0.0;
};

enum class MuStatus { Solved, NonFactorable, Unrealizable };

inline const char* mu_status_name(MuStatus s) {
  switch (s) {
    case MuStatus::Solved: return "solved";
    case MuStatus::NonFactorable: return "non-factorable";
    case MuStatus::Unrealizable: return "unrealizable";
  }
  return "?";
}

struct MuCellSolution {
  MuStatus status = MuStatus::Solved;
  std::vector<double> f_i;  ///< per support point
  std::vector<double> f_j;
  double mixture = 0.0;     ///< sum_mu rho f_i f_j
  double product = 0.0;     ///< f_i * f_j, for witnesses
};

struct MuAugmentedResponse {
  AuxVariableSpec spec;
  std::vector<MuCellSolution> cells;

  bool all_solved() const {
    return std::all_of(cells.begin(), cells.end(),
                       [](const auto& c) { return c.status == MuStatus::Solved; });
  }
};

/// Per cell, finds per-mu local responses whose product, averaged over mu,
/// equals Gamma_hat and whose averages equal the marginals. With a single
/// support point that is only possible when Gamma_hat = f_i f_j. With two or
/// more points, mu_1 forms one group and the rest the other:
///   x = f_i + rho2 d | f_i - rho1 d,  y = f_j + rho2 e | f_j - rho1 e,
///   sum rho x y = f_i f_j + rho1 rho2 d e.
inline MuAugmentedResponse mu_augment(const std::vector<MuCell>& table, const AuxVariableSpec& spec) {
  spec.validate();
  MuAugmentedResponse out;
  out.spec = spec;
  out.cells.reserve(table.size());
  const std::size_t n = spec.support.size();
  for (const auto& cell : table) {
    for (double v : {cell.gamma, cell.f_i, cell.f_j})
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("mu_augment: table values must lie in [0,1]");
    MuCellSolution sol;
    sol.product = cell.f_i * cell.f_j;
    const double c0 = cell.gamma - sol.product;
    if (n == 1) {
      sol.f_i = {cell.f_i};
      sol.f_j = {cell.f_j};
      sol.status = std::abs(c0) <= kResidualTolerance ? MuStatus::Solved : MuStatus::NonFactorable;
      sol.mixture = sol.product;
      out.cells.push_back(std::move(sol));
      continue;
    }
    const double r1 = spec.weights[0], r2 = 1.0 - r1;
    if (r1 <= 0.0 || r2 <= 0.0) {
      sol.status = std::abs(c0) <= kResidualTolerance ? MuStatus::Solved : MuStatus::NonFactorable;
      sol.f_i.assign(n, cell.f_i);
      sol.f_j.assign(n, cell.f_j);
      sol.mixture = sol.product;
      out.cells.push_back(std::move(sol));
      continue;
    }
    const double c = c0 / (r1 * r2);
    // Largest |d| keeping both group values in [0,1], for each sign.
    const double dpos = std::min((1.0 - cell.f_i) / r2, cell.f_i / r1);
    const double dneg = std::min(cell.f_i / r2, (1.0 - cell.f_i) / r1);
    const double epos = std::min((1.0 - cell.f_j) / r2, cell.f_j / r1);
    const double eneg = std::min(cell.f_j / r2, (1.0 - cell.f_j) / r1);
    double db, eb;
    if (c >= 0.0) {
      if (dpos * epos >= dneg * eneg) {
        db = dpos;
        eb = epos;
      } else {
        db = -dneg;
        eb = -eneg;
      }
    } else {
      if (dpos * eneg >= dneg * epos) {
        db = dpos;
        eb = -eneg;
      } else {
        db = -dneg;
        eb = epos;
      }
    }
    const double capacity = std::abs(db * eb);
    double d = 0.0, e = 0.0;
    if (std::abs(c) > capacity * (1.0 + 1e-12) + 1e-15) {
      sol.status = MuStatus::Unrealizable;
      d = db;
      e = eb;
    } else if (c != 0.0) {
      const double t = std::sqrt(std::min(1.0, std::abs(c) / capacity));
      d = db * t;
      e = eb * t;
      // Exact product: rescale e so that d e = c to the last bit we can.
      if (d != 0.0) e = c / d;
    }
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    const double x1 = clamp01(cell.f_i + r2 * d), x2 = clamp01(cell.f_i - r1 * d);
    const double y1 = clamp01(cell.f_j + r2 * e), y2 = clamp01(cell.f_j - r1 * e);
    sol.f_i.assign(n, x2);
    sol.f_j.assign(n, y2);
    sol.f_i[0] = x1;
    sol.f_j[0] = y1;
    sol.mixture = r1 * x1 * y1 + r2 * x2 * y2;
    if (sol.status == MuStatus::Solved && std::abs(sol.mixture - cell.gamma) > kResidualTolerance)
      sol.status = MuStatus::Unrealizable;
    out.cells.push_back(std::move(sol));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Primed responses: device vacua integrated out

struct PrimedOptions {
  std::size_t bank_size = 256;  ///< number of alpha_s samples
  std::size_t bank_begin = 0;   ///< entries below this are left at zero
  std::size_t inner = 256;      ///< device draws per alpha_s
  std::uint64_t seed = 1;
  std::uint64_t device_seed = 0;  ///< 0: same as seed
  bool pin_devices = false;       ///< injected amplitudes fixed at 0
  unsigned threads = 1;
};

/// Tabulated function of the alpha_s bank entry with its Monte Carlo error.
struct PrimedTable {
  std::vector<double> value;
  std::vector<double> se;
};

namespace detail {
template <class Eval>
PrimedTable integrate_primed_impl(const optics::OpticalNetwork& net, const PrimedOptions& opt,
                                  Eval&& eval) {
  require(opt.bank_size >= 1 && opt.inner >= 1, "integrate_primed: empty bank");
  const optics::FieldSampler sampler(net, opt.seed, streams::kBank,
                                     opt.device_seed ? opt.device_seed : opt.seed);
  const std::size_t inner = opt.pin_devices ? 1 : opt.inner;
  PrimedTable t;
  t.value.resize(opt.bank_size);
  t.se.resize(opt.bank_size);
  parallel::for_each_index(opt.bank_size, opt.threads, [&](std::size_t s) {
    if (s < opt.bank_begin) return;
    optics::Field base, f;
    sampler.sample_source(s, base);
    double mean = 0.0, m2 = 0.0;  // Welford
    for (std::size_t m = 0; m < inner; ++m) {
      f = base;
      sampler.sample_devices(s * opt.inner + m, f, opt.pin_devices);
      optics::apply_devices(net, f);
      const double v = eval(f);
      const double delta = v - mean;
      mean += delta / static_cast<double>(m + 1);
      m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(inner);
    t.value[s] = mean;
    t.se[s] = inner > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  });
  return t;
}
}  // namespace detail

/// f_hat'(alpha_s) = E_{alpha_i}[ f(I_port(alpha_s, alpha_i)) ].
inline PrimedTable integrate_primed(const optics::OpticalNetwork& net, const ResponseFunction& f,
                                    std::size_t port, const PrimedOptions& opt) {
  require(port < net.ports.size(), "integrate_primed: port out of range");
  const auto& p = net.ports[port];
  return detail::integrate_primed_impl(net, opt, [&](const optics::Field& field) {
    return f(optics::intensity(field, p.collected_modes));
  });
}

/// Gamma_hat'(alpha_s) = E_{alpha_i, alpha_j}[ Gamma(I_i, I_j) ].
inline PrimedTable integrate_primed(const optics::OpticalNetwork& net, const JointResponse& g,
                                    std::size_t port_i, std::size_t port_j, const PrimedOptions& opt) {
  require(port_i < net.ports.size() && port_j < net.ports.size(),
          "integrate_primed: port out of range");
  const auto& pi = net.ports[port_i];
  const auto& pj = net.ports[port_j];
  return detail::integrate_primed_impl(net, opt, [&](const optics::Field& field) {
    return g(optics::intensity(field, pi.collected_modes), optics::intensity(field, pj.collected_modes));
  });
}

}  // namespace zpfsim::synth
