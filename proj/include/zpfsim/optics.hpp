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

// Linear optics on Wigner amplitudes.
//
// A network is a list of mode slots, a set of source modes fed by the
// crystal's vacuum input, and an ordered list of devices acting in place on
// those slots. Analyzers (PBS, polarizer) own "injected" slots: the fresh
// vacuum entering through their empty ports. Each device is a Bogoliubov map
// a_out = U a + V conj(a); passive devices have V = 0 and unitary U.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "zpfsim/errors.hpp"
#include "zpfsim/rng.hpp"
#include "zpfsim/zpf.hpp"

namespace zpfsim::optics {

using zpf::Amplitude;
using Field = std::vector<Amplitude>;

enum class Side { A, B };

inline const char* side_name(Side s) { return s == Side::A ? "a" : "b"; }

struct CrystalPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double phase = 0.0;  ///< extra phase on top of the pump phase
};

/// Two-mode squeezer: a' = cosh(r) a + e^{i(theta+phase)} sinh(r) conj(b),
/// symmetrically for b. The pump is an external classical parameter.
struct Crystal {
  double gain = 0.0;
  double pump_phase = 0.0;
  std::vector<CrystalPair> pairs;
};

/// Rotates both the signal (H,V) pair and the injected (H,V) pair into the
/// (phi, phi+90deg) basis. The transmitted port then carries the signal's
/// phi component plus the injected vacuum's orthogonal component; the
/// reflected port the other two.
struct PolarizingBeamSplitter {
  double orientation = 0.0;
  std::array<std::size_t, 2> signal{};
  std::array<std::size_t, 2> injected{};
};

/// Rotates the signal pair; the absorbed component stays in the second
/// signal slot. The injected slot fills the orthogonal polarization of the
/// transmitted beam.
struct Polarizer {
  double orientation = 0.0;
  std::array<std::size_t, 2> signal{};
  std::size_t injected = 0;
};

struct FreeSpace {
  double phase = 0.0;
  std::vector<std::size_t> modes;
};

using DeviceKind = std::variant<Crystal, PolarizingBeamSplitter, Polarizer, FreeSpace>;

struct Device {
  std::string name;
  DeviceKind kind;
  /// When set, the orientation is taken from that side's analyzer setting.
  std::optional<Side> analyzer_side;
  /// Removable analyzers can be dropped to form the "no analyzer" reference.
  bool removable = false;
};

inline std::vector<std::size_t> injected_modes(const Device& d) {
  return std::visit(
      [](const auto& k) -> std::vector<std::size_t> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, PolarizingBeamSplitter>)
          return {k.injected[0], k.injected[1]};
        else if constexpr (std::is_same_v<T, Polarizer>)
          return {k.injected};
        else
          return {};
      },
      d.kind);
}

inline std::vector<std::size_t> acted_modes(const Device& d) {
  return std::visit(
      [](const auto& k) -> std::vector<std::size_t> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Crystal>) {
          std::vector<std::size_t> m;
          for (const auto& p : k.pairs) {
            m.push_back(p.first);
            m.push_back(p.second);
          }
          return m;
        } else if constexpr (std::is_same_v<T, PolarizingBeamSplitter>) {
          return {k.signal[0], k.signal[1], k.injected[0], k.injected[1]};
        } else if constexpr (std::is_same_v<T, Polarizer>) {
          return {k.signal[0], k.signal[1], k.injected};
        } else {
          return k.modes;
        }
      },
      d.kind);
}

struct DetectorPort {
  int id = 0;
  std::string name;
  std::vector<std::size_t> collected_modes;
  /// Modes collected when this side's removable analyzer is absent.
  std::vector<std::size_t> bare_modes;
  double vacuum_baseline = 0.0;  ///< I_0, filled by validate()
  double threshold = 0.0;        ///< dead-zone threshold for shaped responses
  Side side = Side::A;
  int outcome = +1;  ///< Bell outcome reported when this port fires
};

struct PortIntensity {
  int detector_id = 0;
  double value = 0.0;
};

struct OpticalNetwork {
  std::vector<zpf::ModeId> modes;
  std::vector<std::size_t> source_modes;
  std::vector<Device> devices;
  std::vector<DetectorPort> ports;
  double quadrature_variance = zpf::kVacuumQuadratureVariance;

  std::size_t mode_count() const noexcept { return modes.size(); }

  std::size_t port_index(int id) const {
    for (std::size_t i = 0; i < ports.size(); ++i)
      if (ports[i].id == id) return i;
    throw ContractViolation("unknown detector id " + std::to_string(id));
  }

  std::vector<std::size_t> ports_on(Side s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ports.size(); ++i)
      if (ports[i].side == s) out.push_back(i);
    return out;
  }
};

/// Vacuum mean of the port intensity: every collected mode contributes
/// E|alpha|^2 = 2 * quadrature_variance, independently of the devices.
inline double vacuum_baseline(const OpticalNetwork& net, const DetectorPort& port) {
  return 2.0 * net.quadrature_variance * static_cast<double>(port.collected_modes.size());
}

/// Checks mode wiring and fills the vacuum baselines. Throws ConfigError.
inline void validate(OpticalNetwork& net) {
  const std::size_t n = net.modes.size();
  if (n == 0) throw ConfigError("network has no modes");
  if (!(net.quadrature_variance > 0.0)) throw ConfigError("quadrature_variance must be positive");
  std::set<std::size_t> seen;
  for (const auto& m : net.modes) {
    if (m.index >= n) throw ConfigError("mode index " + std::to_string(m.index) + " is not dense");
    if (!seen.insert(m.index).second)
      throw ConfigError("duplicate mode index " + std::to_string(m.index));
  }
  auto check = [&](std::size_t m, const std::string& where) {
    if (m >= n) throw ConfigError(where + " references undefined mode " + std::to_string(m));
  };

  std::map<std::size_t, std::string> owner;
  for (std::size_t m : net.source_modes) {
    check(m, "source_modes");
    if (!owner.emplace(m, "source").second)
      throw ConfigError("mode " + std::to_string(m) + " listed twice in source_modes");
  }
  for (std::size_t d = 0; d < net.devices.size(); ++d) {
    const auto& dev = net.devices[d];
    const std::string where = "device '" + dev.name + "'";
    for (std::size_t m : acted_modes(dev)) check(m, where);
    for (std::size_t m : injected_modes(dev)) {
      auto [it, fresh] = owner.emplace(m, dev.name);
      if (!fresh)
        throw ConfigError(where + " injects mode " + std::to_string(m) + " already fed by " +
                          it->second + " (vacuum sets must be disjoint)");
    }
    if (const auto* c = std::get_if<Crystal>(&dev.kind)) {
      if (!(c->gain >= 0.0) || !std::isfinite(c->gain))
        throw ConfigError(where + ": gain must be a nonnegative finite number");
      std::set<std::size_t> used;
      for (const auto& p : c->pairs) {
        if (p.first == p.second || !used.insert(p.first).second || !used.insert(p.second).second)
          throw ConfigError(where + ": crystal pairs must use distinct modes");
      }
    }
    if (dev.removable && !std::holds_alternative<Polarizer>(dev.kind) &&
        !std::holds_alternative<PolarizingBeamSplitter>(dev.kind))
      throw ConfigError(where + ": only analyzers can be removable");
  }
  for (std::size_t m = 0; m < n; ++m)
    if (!owner.count(m))
      throw ConfigError("mode " + std::to_string(m) +
                        " is neither a source mode nor injected by a device");

  std::set<int> ids;
  for (auto& port : net.ports) {
    if (!ids.insert(port.id).second)
      throw ConfigError("duplicate detector id " + std::to_string(port.id));
    for (std::size_t m : port.collected_modes) check(m, "detector " + std::to_string(port.id));
    for (std::size_t m : port.bare_modes) check(m, "detector " + std::to_string(port.id));
    if (port.outcome != 1 && port.outcome != -1)
      throw ConfigError("detector " + std::to_string(port.id) + ": outcome must be +1 or -1");
    if (!(port.threshold >= 0.0)) throw ConfigError("detector threshold must be nonnegative");
    port.vacuum_baseline = vacuum_baseline(net, port);
  }
}

/// Copy with every side-bound analyzer set to the given orientations.
inline OpticalNetwork configured(const OpticalNetwork& net, double phi_a, double phi_b) {
  OpticalNetwork out = net;
  for (auto& dev : out.devices) {
    if (!dev.analyzer_side) continue;
    const double phi = *dev.analyzer_side == Side::A ? phi_a : phi_b;
    if (auto* p = std::get_if<PolarizingBeamSplitter>(&dev.kind)) p->orientation = phi;
    if (auto* p = std::get_if<Polarizer>(&dev.kind)) p->orientation = phi;
  }
  return out;
}

/// The "no analyzer" configuration for one side: removable analyzers on that
/// side become identity maps (their injected slots stay allocated so sample
/// streams line up) and that side's ports collect their bare modes.
inline OpticalNetwork without_analyzer(const OpticalNetwork& net, Side side) {
  OpticalNetwork out = net;
  bool removed = false;
  for (auto& dev : out.devices) {
    if (!dev.removable || dev.analyzer_side != side) continue;
    std::vector<std::size_t> none;
    dev.kind = FreeSpace{0.0, none};
    dev.name += "(removed)";
    removed = true;
  }
  if (!removed) throw ConfigError("no removable analyzer on side " + std::string(side_name(side)));
  for (auto& port : out.ports) {
    if (port.side != side) continue;
    if (port.bare_modes.empty())
      throw ConfigError("detector " + std::to_string(port.id) + " has no bare_modes");
    port.collected_modes = port.bare_modes;
  }
  // Injected slots of the removed device are no longer consumed by anything,
  // so they remain plain vacuum and do not reach any port.
  for (auto& port : out.ports) port.vacuum_baseline = vacuum_baseline(out, port);
  return out;
}

// ---------------------------------------------------------------------------
// Propagation

namespace detail {
inline void rotate(Field& f, std::size_t h, std::size_t v, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const Amplitude a = f[h], b = f[v];
  f[h] = c * a + s * b;
  f[v] = -s * a + c * b;
}
}  // namespace detail

inline void apply(const Device& dev, Field& f) {
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Crystal>) {
          const double ch = std::cosh(k.gain), sh = std::sinh(k.gain);
          for (const auto& p : k.pairs) {
            const Amplitude g = std::polar(sh, k.pump_phase + p.phase);
            const Amplitude a = f[p.first], b = f[p.second];
            f[p.first] = ch * a + g * std::conj(b);
            f[p.second] = ch * b + g * std::conj(a);
          }
        } else if constexpr (std::is_same_v<T, PolarizingBeamSplitter>) {
          detail::rotate(f, k.signal[0], k.signal[1], k.orientation);
          detail::rotate(f, k.injected[0], k.injected[1], k.orientation);
        } else if constexpr (std::is_same_v<T, Polarizer>) {
          detail::rotate(f, k.signal[0], k.signal[1], k.orientation);
        } else {
          const Amplitude ph = std::polar(1.0, k.phase);
          for (std::size_t m : k.modes) f[m] *= ph;
        }
      },
      dev.kind);
}

inline void apply_devices(const OpticalNetwork& net, Field& f) {
  for (const auto& dev : net.devices) apply(dev, f);
}

/// Full propagation with explicitly supplied vacuum draws. device_samples is
/// keyed by device position and must cover every device with injected modes.
inline Field propagate(const OpticalNetwork& net, const zpf::VacuumSample& source,
                       const std::map<std::size_t, zpf::VacuumSample>& device_samples) {
  require(source.size() == net.source_modes.size(),
          "propagate: source sample length does not match source_modes");
  Field f(net.mode_count(), Amplitude{});
  for (std::size_t i = 0; i < net.source_modes.size(); ++i)
    f[net.source_modes[i]] = source.amplitudes[i];
  for (std::size_t d = 0; d < net.devices.size(); ++d) {
    const auto inj = injected_modes(net.devices[d]);
    if (inj.empty()) continue;
    auto it = device_samples.find(d);
    require(it != device_samples.end(),
            "propagate: missing vacuum sample for device '" + net.devices[d].name + "'");
    require(it->second.size() == inj.size(),
            "propagate: device sample length mismatch for '" + net.devices[d].name + "'");
    for (std::size_t i = 0; i < inj.size(); ++i) f[inj[i]] = it->second.amplitudes[i];
  }
  apply_devices(net, f);
  return f;
}

inline double intensity(const Field& f, const std::vector<std::size_t>& modes) {
  double total = 0.0;
  for (std::size_t m : modes) total += std::norm(f[m]);
  return total;
}

inline PortIntensity port_intensity(const OpticalNetwork& net, const Field& field,
                                    const DetectorPort& port) {
  require(field.size() >= net.mode_count(), "port_intensity: field does not cover the network");
  for (std::size_t m : port.collected_modes)
    require(m < field.size(), "port_intensity: field does not cover collected modes");
  return {port.id, intensity(field, port.collected_modes)};
}

/// Draws the pre-device field for a trial: source modes from the source
/// stream, each device's injected slots from its own stream. Trial k gets the
/// same vacuum in every analyzer configuration (common random numbers).
class FieldSampler {
 public:
  FieldSampler(const OpticalNetwork& net, std::uint64_t seed,
               std::uint32_t source_stream = streams::kSource)
      : FieldSampler(net, seed, source_stream, seed) {}

  /// Separate seed for the device vacua, used to redraw alpha_i for a fixed
  /// alpha_s bank.
  FieldSampler(const OpticalNetwork& net, std::uint64_t seed, std::uint32_t source_stream,
               std::uint64_t device_seed)
      : n_(net.mode_count()),
        source_modes_(net.source_modes),
        source_(zpf::WignerVacuum{net.source_modes.size(), net.quadrature_variance}, seed,
                source_stream) {
    for (std::size_t d = 0; d < net.devices.size(); ++d) {
      auto inj = injected_modes(net.devices[d]);
      if (inj.empty()) continue;
      devices_.push_back({std::move(inj),
                          zpf::VacuumSampler(zpf::WignerVacuum{0, net.quadrature_variance}, device_seed,
                                             streams::kDeviceBase + static_cast<std::uint32_t>(d))});
    }
  }

  void sample_source(std::uint64_t index, Field& f) const {
    f.assign(n_, Amplitude{});
    Field tmp(source_modes_.size());
    source_.fill(index, tmp);
    for (std::size_t i = 0; i < source_modes_.size(); ++i) f[source_modes_[i]] = tmp[i];
  }

  /// Fills injected slots only, keeping the source slots of f.
  void sample_devices(std::uint64_t index, Field& f, bool pin_to_zero = false) const {
    Field tmp;
    for (const auto& d : devices_) {
      tmp.resize(d.modes.size());
      if (pin_to_zero)
        std::fill(tmp.begin(), tmp.end(), Amplitude{});
      else
        d.sampler.fill(index, tmp);
      for (std::size_t i = 0; i < d.modes.size(); ++i) f[d.modes[i]] = tmp[i];
    }
  }

  void sample(std::uint64_t index, Field& f) const {
    sample_source(index, f);
    sample_devices(index, f);
  }

 private:
  struct DeviceDraw {
    std::vector<std::size_t> modes;
    zpf::VacuumSampler sampler;
  };
  std::size_t n_;
  std::vector<std::size_t> source_modes_;
  zpf::VacuumSampler source_;
  std::vector<DeviceDraw> devices_;
};

// ---------------------------------------------------------------------------
// Gaussian description (oracle side)

struct LinearMap {
  Eigen::MatrixXcd U;
  Eigen::MatrixXcd V;

  static LinearMap identity(std::size_t n) {
    return {Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Zero(n, n)};
  }
};

/// Applies `next` after `first`.
inline LinearMap compose(const LinearMap& next, const LinearMap& first) {
  return {next.U * first.U + next.V * first.V.conjugate(),
          next.U * first.V + next.V * first.U.conjugate()};
}

inline LinearMap device_map(const Device& dev, std::size_t n) {
  LinearMap m = LinearMap::identity(n);
  auto rot = [&](std::size_t h, std::size_t v, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(n, n);
    r(h, h) = c;
    r(h, v) = s;
    r(v, h) = -s;
    r(v, v) = c;
    m.U = r * m.U;
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Crystal>) {
          const double ch = std::cosh(k.gain), sh = std::sinh(k.gain);
          for (const auto& p : k.pairs) {
            const std::complex<double> g = std::polar(sh, k.pump_phase + p.phase);
            m.U(p.first, p.first) = ch;
            m.U(p.second, p.second) = ch;
            m.V(p.first, p.second) = g;
            m.V(p.second, p.first) = g;
          }
        } else if constexpr (std::is_same_v<T, PolarizingBeamSplitter>) {
          rot(k.signal[0], k.signal[1], k.orientation);
          rot(k.injected[0], k.injected[1], k.orientation);
        } else if constexpr (std::is_same_v<T, Polarizer>) {
          rot(k.signal[0], k.signal[1], k.orientation);
        } else {
          for (std::size_t md : k.modes) m.U(md, md) = std::polar(1.0, k.phase);
        }
      },
      dev.kind);
  return m;
}

inline LinearMap network_map(const OpticalNetwork& net) {
  LinearMap total = LinearMap::identity(net.mode_count());
  for (const auto& dev : net.devices) total = compose(device_map(dev, net.mode_count()), total);
  return total;
}

namespace detail {
inline double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}
}  // namespace detail

/// Deviation from commutator preservation. Passive devices: ||U^H U - I||
/// (plus ||V||, which must vanish). Crystals: the Bogoliubov conditions
/// U U^H - V V^H = I and U V^T = V U^T.
inline double unitarity_check(const Device& dev) {
  std::size_t n = 0;
  for (std::size_t m : acted_modes(dev)) n = std::max(n, m + 1);
  if (n == 0) return 0.0;
  const LinearMap m = device_map(dev, n);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  if (std::holds_alternative<Crystal>(dev.kind)) {
    const double a = detail::spectral_norm(m.U * m.U.adjoint() - m.V * m.V.adjoint() - id);
    const double b = detail::spectral_norm(m.U * m.V.transpose() - m.V * m.U.transpose());
    return std::max(a, b);
  }
  return detail::spectral_norm(m.U.adjoint() * m.U - id) + detail::spectral_norm(m.V);
}

/// Real 2n x 2n matrix acting on quadratures (Re a_0, Im a_0, Re a_1, ...).
inline Eigen::MatrixXd real_transfer(const LinearMap& m) {
  const auto n = m.U.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ur = m.U(k, j).real(), ui = m.U(k, j).imag();
      const double vr = m.V(k, j).real(), vi = m.V(k, j).imag();
      t(2 * k, 2 * j) = ur + vr;
      t(2 * k, 2 * j + 1) = -ui + vi;
      t(2 * k + 1, 2 * j) = ui + vi;
      t(2 * k + 1, 2 * j + 1) = ur - vr;
    }
  }
  return t;
}

/// Covariance of the output quadratures for vacuum input.
inline Eigen::MatrixXd output_covariance(const OpticalNetwork& net) {
  const Eigen::MatrixXd t = real_transfer(network_map(net));
  Eigen::MatrixXd cov = net.quadrature_variance * (t * t.transpose());
  return 0.5 * (cov + cov.transpose());
}

/// Closed-form port moments from the Isserlis oracle. Independent of the
/// sampling path: only the network's linear map enters.
class MomentOracle {
 public:
  explicit MomentOracle(const OpticalNetwork& net) : net_(net), cov_(output_covariance(net)) {}

  double mean_intensity(const DetectorPort& port) const {
    double total = 0.0;
    for (std::size_t m : port.collected_modes)
      for (int q : {zpf::re_index(m), zpf::im_index(m)}) total += moment({q, q});
    return total;
  }

  double intensity_product(const DetectorPort& p, const DetectorPort& q) const {
    double total = 0.0;
    for (std::size_t m : p.collected_modes)
      for (int u : {zpf::re_index(m), zpf::im_index(m)})
        for (std::size_t m2 : q.collected_modes)
          for (int v : {zpf::re_index(m2), zpf::im_index(m2)}) total += moment({u, u, v, v});
    return total;
  }

  /// <I - I_0>
  double excess_mean(const DetectorPort& port) const {
    return mean_intensity(port) - vacuum_baseline(net_, port);
  }

  /// <(I_p - I_0p)(I_q - I_0q)>
  double excess_product(const DetectorPort& p, const DetectorPort& q) const {
    const double cp = vacuum_baseline(net_, p), cq = vacuum_baseline(net_, q);
    return intensity_product(p, q) - cq * mean_intensity(p) - cp * mean_intensity(q) + cp * cq;
  }

  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

 private:
  double moment(std::vector<int> mono) const {
    return zpf::gaussian_moment({cov_, std::move(mono)});
  }

  const OpticalNetwork& net_;
  Eigen::MatrixXd cov_;
};

// ---------------------------------------------------------------------------
// Reference networks

namespace presets {

/// Polarization-entangled pair source with one PBS per side.
/// Modes: 0 sH, 1 sV, 2 iH, 3 iV, 4/5 vacuum into PBS a, 6/7 into PBS b.
/// Ports: 1 a+ {0,5}, 2 a- {1,4}, 3 b+ {2,7}, 4 b- {3,6}.
inline OpticalNetwork singlet_pbs(double gain, double pump_phase = 0.0) {
  OpticalNetwork net;
  const char* labels[] = {"signal_H", "signal_V", "idler_H", "idler_V",
                          "vac_a_H",  "vac_a_V",  "vac_b_H", "vac_b_V"};
  for (std::size_t m = 0; m < 8; ++m) net.modes.push_back({m, labels[m]});
  net.source_modes = {0, 1, 2, 3};
  const double pi = 3.14159265358979323846;
  net.devices.push_back({"crystal", Crystal{gain, pump_phase, {{0, 3, 0.0}, {1, 2, pi}}}, {}, false});
  net.devices.push_back({"pbs_a", PolarizingBeamSplitter{0.0, {0, 1}, {4, 5}}, Side::A, false});
  net.devices.push_back({"pbs_b", PolarizingBeamSplitter{0.0, {2, 3}, {6, 7}}, Side::B, false});
  net.ports = {
      {1, "a+", {0, 5}, {}, 0.0, 0.0, Side::A, +1},
      {2, "a-", {1, 4}, {}, 0.0, 0.0, Side::A, -1},
      {3, "b+", {2, 7}, {}, 0.0, 0.0, Side::B, +1},
      {4, "b-", {3, 6}, {}, 0.0, 0.0, Side::B, -1},
  };
  validate(net);
  return net;
}

/// Same source with a removable polarizer per side and one detector behind
/// each. Modes: 0..3 as above, 4 vacuum into polarizer a, 5 into polarizer b.
inline OpticalNetwork singlet_polarizers(double gain, double pump_phase = 0.0) {
  OpticalNetwork net;
  const char* labels[] = {"signal_H", "signal_V", "idler_H", "idler_V", "vac_a", "vac_b"};
  for (std::size_t m = 0; m < 6; ++m) net.modes.push_back({m, labels[m]});
  net.source_modes = {0, 1, 2, 3};
  const double pi = 3.14159265358979323846;
  net.devices.push_back({"crystal", Crystal{gain, pump_phase, {{0, 3, 0.0}, {1, 2, pi}}}, {}, false});
  net.devices.push_back({"polarizer_a", Polarizer{0.0, {0, 1}, 4}, Side::A, true});
  net.devices.push_back({"polarizer_b", Polarizer{0.0, {2, 3}, 5}, Side::B, true});
  net.ports = {
      {1, "a", {0, 4}, {0, 1}, 0.0, 0.0, Side::A, +1},
      {2, "b", {2, 5}, {2, 3}, 0.0, 0.0, Side::B, +1},
  };
  validate(net);
  return net;
}

}  // namespace presets

}  // namespace zpfsim::optics
