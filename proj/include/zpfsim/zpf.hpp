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

// Vacuum Wigner sampling and the Gaussian-moment (Isserlis) oracle.
//
// Convention: each complex mode amplitude alpha has independent Gaussian
// real and imaginary parts with variance 1/4, so E|alpha|^2 = 1/2 and the
// vacuum intensity of one mode is 1/2 in natural units.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zpfsim/errors.hpp"
#include "zpfsim/rng.hpp"

namespace zpfsim::zpf {

using Amplitude = std::complex<double>;

inline constexpr double kVacuumQuadratureVariance = 0.25;

/// One field mode: a dense index plus a free-form tag such as "signal_H".
struct ModeId {
  std::size_t index = 0;
  std::string label;
};

/// A draw of the hidden variable: one complex amplitude per mode.
struct VacuumSample {
  std::vector<Amplitude> amplitudes;

  std::size_t size() const noexcept { return amplitudes.size(); }
};

struct WignerVacuum {
  std::size_t mode_count = 0;
  double quadrature_variance = kVacuumQuadratureVariance;

  void validate() const {
    if (!(quadrature_variance > 0.0) || !std::isfinite(quadrature_variance))
      throw ConfigError("vacuum quadrature_variance must be positive and finite");
  }
};

/// Stateless sampler: sample k is a pure function of (seed, stream, k).
class VacuumSampler {
 public:
  VacuumSampler(WignerVacuum spec, std::uint64_t seed,
                std::uint32_t stream = streams::kSource)
      : spec_(spec), rng_(seed, stream), sigma_(0.0) {
    spec_.validate();
    sigma_ = std::sqrt(spec_.quadrature_variance);
  }

  /// Writes out.size() amplitudes for sample `index`. Mode m of a sample
  /// uses block m, so the first k modes do not depend on out.size().
  void fill(std::uint64_t index, std::span<Amplitude> out) const {
    for (std::size_t m = 0; m < out.size(); ++m) {
      const auto z = rng_.normals(index, static_cast<std::uint32_t>(m));
      out[m] = Amplitude(sigma_ * z[0], sigma_ * z[1]);
    }
  }

  VacuumSample operator()(std::uint64_t index) const {
    VacuumSample s;
    s.amplitudes.resize(spec_.mode_count);
    fill(index, s.amplitudes);
    return s;
  }

  const WignerVacuum& spec() const noexcept { return spec_; }

 private:
  WignerVacuum spec_;
  CounterStream rng_;
  double sigma_;
};

inline std::vector<VacuumSample> sample_vacuum(const WignerVacuum& spec, std::uint64_t seed,
                                               std::size_t count) {
  spec.validate();
  if (count == 0) throw ConfigError("sample_vacuum: count must be at least 1");
  VacuumSampler sampler(spec, seed);
  std::vector<VacuumSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sampler(k));
  return out;
}

inline double log_wigner_density(const WignerVacuum& spec, const VacuumSample& sample) {
  spec.validate();
  require(sample.size() == spec.mode_count,
          "wigner_density: sample length does not match mode_count");
  const double v = spec.quadrature_variance;
  double norm2 = 0.0;
  for (const auto& a : sample.amplitudes) {
    require(std::isfinite(a.real()) && std::isfinite(a.imag()),
            "wigner_density: non-finite amplitude");
    norm2 += std::norm(a);
  }
  return -static_cast<double>(spec.mode_count) * std::log(2.0 * std::numbers::pi * v) -
         norm2 / (2.0 * v);
}

/// Product of per-mode Gaussian densities over (Re alpha, Im alpha).
inline double wigner_density(const WignerVacuum& spec, const VacuumSample& sample) {
  return std::exp(log_wigner_density(spec, sample));
}

struct GaussianMomentQuery {
  Eigen::MatrixXd covariance;
  std::vector<int> monomial;  ///< quadrature indices, repeated for powers
};

inline constexpr std::size_t kMaxMomentOrder = 8;

namespace detail {
// Sum over perfect matchings of idx[0..n) restricted to the unused mask.
inline double pairing_sum(const Eigen::MatrixXd& c, const std::vector<int>& idx,
                          unsigned used) {
  const unsigned n = static_cast<unsigned>(idx.size());
  unsigned first = 0;
  while (first < n && (used & (1u << first))) ++first;
  if (first == n) return 1.0;
  used |= 1u << first;
  double total = 0.0;
  for (unsigned j = first + 1; j < n; ++j) {
    if (used & (1u << j)) continue;
    const double cij = c(idx[first], idx[j]);
    if (cij == 0.0) continue;
    total += cij * pairing_sum(c, idx, used | (1u << j));
  }
  return total;
}
}  // namespace detail

/// E[x_{i1} x_{i2} ... x_{ik}] for a zero-mean Gaussian vector, by exact
/// enumeration of Isserlis pairings. Odd orders return 0 by symmetry.
inline double gaussian_moment(const GaussianMomentQuery& query) {
  const auto& c = query.covariance;
  require(c.rows() == c.cols(), "gaussian_moment: covariance must be square");
  require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + c.cwiseAbs().maxCoeff()),
          "gaussian_moment: covariance must be symmetric");
  for (int i : query.monomial)
    require(i >= 0 && i < c.rows(), "gaussian_moment: monomial index out of range");
  if (query.monomial.size() > kMaxMomentOrder)
    throw UnsupportedError("gaussian_moment: order above 8 is not supported");
  if (c.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= -1e-10 * (1.0 + c.cwiseAbs().maxCoeff()),
            "gaussian_moment: covariance must be positive semidefinite");
  }
  if (query.monomial.size() % 2 == 1) return 0.0;
  return detail::pairing_sum(c, query.monomial, 0u);
}

/// Quadrature index helpers: mode m owns real index 2m and imaginary 2m+1.
constexpr int re_index(std::size_t mode) { return static_cast<int>(2 * mode); }
constexpr int im_index(std::size_t mode) { return static_cast<int>(2 * mode + 1); }

}  // namespace zpfsim::zpf
