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

// YAML configuration files for experiments, Kot models and discrete
// hidden-variable models. Every error names the file, the line and the
// dotted field path. Unknown keys are rejected so typos do not silently
// fall back to defaults.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zpfsim/errors.hpp"
#include "zpfsim/experiment.hpp"
#include "zpfsim/foundations.hpp"
#include "zpfsim/kot.hpp"

namespace zpfsim::config {

inline constexpr double kDegree = std::numbers::pi / 180.0;

/// Analyzer angles that maximize the singlet CHSH value, in chsh() order.
inline std::vector<bell::Setting> chsh_settings() {
  return {{0.0, 22.5 * kDegree}, {0.0, -22.5 * kDegree}, {45.0 * kDegree, 22.5 * kDegree},
          {45.0 * kDegree, -22.5 * kDegree}};
}

// ---------------------------------------------------------------------------
// Node access with located errors

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& what) const {
    std::string where = source_;
    if (n.IsDefined() && n.Mark().line >= 0) where += ":" + std::to_string(n.Mark().line + 1);
    throw ConfigError(where + ": " + (path.empty() ? "" : "field '" + path + "': ") + what);
  }

  void expect_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) fail(n, path, "expected a mapping");
  }

  /// Rejects keys outside `allowed`.
  void only(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) const {
    expect_map(n, path);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, join(path, key), "unknown field");
    }
  }

  YAML::Node required(const YAML::Node& n, const std::string& path, const std::string& key) const {
    const auto c = n[key];
    if (!c) fail(n, join(path, key), "missing required field");
    return c;
  }

  template <class T>
  T as(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, std::string("expected a ") + type_name<T>());
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, path, std::string("expected a ") + type_name<T>() + ", got '" + n.Scalar() + "'");
    }
  }

  template <class T>
  T get(const YAML::Node& n, const std::string& path, const std::string& key, T fallback) const {
    const auto c = n[key];
    return c ? as<T>(c, join(path, key)) : fallback;
  }

  template <class T>
  T need(const YAML::Node& n, const std::string& path, const std::string& key) const {
    return as<T>(required(n, path, key), join(path, key));
  }

  template <class T>
  std::vector<T> list(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence()) fail(n, path, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(as<T>(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  const std::string& source() const noexcept { return source_; }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "boolean";
    else if constexpr (std::is_integral_v<T>) return "integer";
    else if constexpr (std::is_floating_point_v<T>) return "number";
    else return "string";
  }

  std::string source_;
};

inline YAML::Node parse(const std::string& text, const std::string& source) {
  try {
    auto n = YAML::Load(text);
    if (!n.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    return n;
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Network

namespace detail {

inline optics::Side side_of(const Reader& r, const YAML::Node& n, const std::string& path) {
  const auto s = r.as<std::string>(n, path);
  if (s == "a" || s == "A") return optics::Side::A;
  if (s == "b" || s == "B") return optics::Side::B;
  r.fail(n, path, "side must be 'a' or 'b'");
}

inline optics::Device device(const Reader& r, const YAML::Node& n, const std::string& path) {
  r.expect_map(n, path);
  optics::Device d;
  const auto type = r.need<std::string>(n, path, "type");
  d.name = r.get<std::string>(n, path, "name", type);
  if (n["analyzer"]) d.analyzer_side = side_of(r, n["analyzer"], Reader::join(path, "analyzer"));
  d.removable = r.get<bool>(n, path, "removable", false);
  auto pair = [&](const char* key) {
    const auto v = r.list<std::size_t>(r.required(n, path, key), Reader::join(path, key));
    if (v.size() != 2) r.fail(n[key], Reader::join(path, key), "expected two mode indices");
    return std::array<std::size_t, 2>{v[0], v[1]};
  };
  if (type == "crystal") {
    r.only(n, path, {"type", "name", "gain", "pump_phase", "pairs"});
    optics::Crystal c;
    c.gain = r.need<double>(n, path, "gain");
    c.pump_phase = r.get<double>(n, path, "pump_phase", 0.0);
    const auto pairs = r.required(n, path, "pairs");
    if (!pairs.IsSequence()) r.fail(pairs, path + ".pairs", "expected a list of [first, second, phase]");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto p = Reader::join(path, "pairs[" + std::to_string(i) + "]");
      const auto v = r.list<double>(pairs[i], p);
      if (v.size() < 2 || v.size() > 3) r.fail(pairs[i], p, "expected [first, second] or [first, second, phase]");
      c.pairs.push_back({static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v.size() == 3 ? v[2] : 0.0});
    }
    d.kind = c;
  } else if (type == "pbs") {
    r.only(n, path, {"type", "name", "signal", "injected", "analyzer", "removable", "orientation"});
    d.kind = optics::PolarizingBeamSplitter{r.get<double>(n, path, "orientation", 0.0) * kDegree, pair("signal"),
                                            pair("injected")};
  } else if (type == "polarizer") {
    r.only(n, path, {"type", "name", "signal", "injected", "analyzer", "removable", "orientation"});
    d.kind = optics::Polarizer{r.get<double>(n, path, "orientation", 0.0) * kDegree, pair("signal"),
                               r.need<std::size_t>(n, path, "injected")};
  } else if (type == "free") {
    r.only(n, path, {"type", "name", "phase", "modes"});
    d.kind = optics::FreeSpace{r.need<double>(n, path, "phase"),
                               r.list<std::size_t>(r.required(n, path, "modes"), path + ".modes")};
  } else {
    r.fail(n["type"], path + ".type", "unknown device type '" + type + "' (crystal, pbs, polarizer, free)");
  }
  return d;
}

inline optics::DetectorPort port(const Reader& r, const YAML::Node& n, const std::string& path) {
  r.only(n, path, {"id", "name", "modes", "bare_modes", "side", "outcome", "threshold"});
  optics::DetectorPort p;
  p.id = r.need<int>(n, path, "id");
  p.name = r.get<std::string>(n, path, "name", "port" + std::to_string(p.id));
  p.collected_modes = r.list<std::size_t>(r.required(n, path, "modes"), path + ".modes");
  if (n["bare_modes"]) p.bare_modes = r.list<std::size_t>(n["bare_modes"], path + ".bare_modes");
  p.side = side_of(r, r.required(n, path, "side"), path + ".side");
  p.outcome = r.get<int>(n, path, "outcome", +1);
  if (p.outcome != 1 && p.outcome != -1) r.fail(n["outcome"], path + ".outcome", "outcome must be +1 or -1");
  p.threshold = r.get<double>(n, path, "threshold", 0.0);
  return p;
}

inline void validate_network(const Reader& r, const YAML::Node& n, optics::OpticalNetwork& net) {
  try {
    optics::validate(net);
  } catch (const ConfigError& e) {
    r.fail(n, "network", e.what());
  } catch (const ContractViolation& e) {
    r.fail(n, "network", e.what());
  }
}

}  // namespace detail

/// `network` section plus the port list from `detectors`. A preset builds
/// the reference network; otherwise modes, devices and ports are explicit.
inline optics::OpticalNetwork load_network(const Reader& r, const YAML::Node& net_node, const YAML::Node& det) {
  const std::string path = "network";
  optics::OpticalNetwork net;
  if (net_node["preset"]) {
    r.only(net_node, path, {"preset", "gain", "pump_phase"});
    const auto name = r.as<std::string>(net_node["preset"], "network.preset");
    const double gain = r.need<double>(net_node, path, "gain");
    const double phase = r.get<double>(net_node, path, "pump_phase", 0.0);
    if (name == "singlet_pbs") net = optics::presets::singlet_pbs(gain, phase);
    else if (name == "singlet_polarizers") net = optics::presets::singlet_polarizers(gain, phase);
    else r.fail(net_node["preset"], "network.preset", "unknown preset '" + name + "' (singlet_pbs, singlet_polarizers)");
    if (det["ports"]) r.fail(det["ports"], "detectors.ports", "ports come from the preset; use detectors.thresholds");
  } else {
    r.only(net_node, path, {"modes", "source_modes", "devices", "quadrature_variance"});
    const auto labels = r.list<std::string>(r.required(net_node, path, "modes"), "network.modes");
    for (std::size_t m = 0; m < labels.size(); ++m) net.modes.push_back({m, labels[m]});
    net.source_modes = r.list<std::size_t>(r.required(net_node, path, "source_modes"), "network.source_modes");
    net.quadrature_variance = r.get<double>(net_node, path, "quadrature_variance", net.quadrature_variance);
    const auto devs = r.required(net_node, path, "devices");
    if (!devs.IsSequence()) r.fail(devs, "network.devices", "expected a list");
    for (std::size_t i = 0; i < devs.size(); ++i)
      net.devices.push_back(detail::device(r, devs[i], "network.devices[" + std::to_string(i) + "]"));
    const auto ports = r.required(det, "detectors", "ports");
    if (!ports.IsSequence()) r.fail(ports, "detectors.ports", "expected a list");
    for (std::size_t i = 0; i < ports.size(); ++i)
      net.ports.push_back(detail::port(r, ports[i], "detectors.ports[" + std::to_string(i) + "]"));
  }
  if (const auto th = det["thresholds"]) {
    const auto v = r.list<double>(th, "detectors.thresholds");
    if (v.size() != net.ports.size()) r.fail(th, "detectors.thresholds", "expected one threshold per port");
    for (std::size_t p = 0; p < v.size(); ++p) net.ports[p].threshold = v[p];
  }
  detail::validate_network(r, net_node, net);
  return net;
}

// ---------------------------------------------------------------------------
// Experiment

namespace detail {

inline synth::ResponseTemplate response_template(const Reader& r, const YAML::Node& n, const std::string& path) {
  synth::ResponseTemplate t;
  if (!n) return t;
  r.only(n, path, {"kind", "threshold", "threshold_second", "cap", "bins"});
  const auto kind = r.get<std::string>(n, path, "kind", "constant");
  if (kind == "constant") t.kind = synth::TemplateKind::Constant;
  else if (kind == "dead-linear-saturate") t.kind = synth::TemplateKind::DeadLinearSaturate;
  else r.fail(n["kind"], path + ".kind", "unknown template '" + kind + "' (constant, dead-linear-saturate)");
  t.threshold = r.get<double>(n, path, "threshold", t.threshold);
  t.threshold_second = r.get<double>(n, path, "threshold_second", t.threshold_second);
  t.cap = r.get<double>(n, path, "cap", t.cap);
  t.bins = r.get<std::size_t>(n, path, "bins", t.bins);
  try {
    t.validate();
  } catch (const ConfigError& e) {
    r.fail(n, path, e.what());
  }
  return t;
}

inline std::optional<double> auto_or_number(const Reader& r, const YAML::Node& n, const std::string& path) {
  if (!n) return std::nullopt;
  if (n.IsScalar() && n.Scalar() == "auto") return std::nullopt;
  return r.as<double>(n, path);
}

inline std::vector<bell::Setting> settings(const Reader& r, const YAML::Node& n, const std::string& path) {
  if (n.IsScalar() && n.Scalar() == "chsh") return chsh_settings();
  if (!n.IsSequence()) r.fail(n, path, "expected 'chsh' or a list of [phi_a, phi_b] in degrees");
  std::vector<bell::Setting> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const auto v = r.list<double>(n[i], p);
    if (v.size() != 2) r.fail(n[i], p, "expected [phi_a, phi_b] in degrees");
    out.push_back({v[0] * kDegree, v[1] * kDegree});
  }
  return out;
}

}  // namespace detail

inline experiment::ExperimentConfig load_experiment_text(const std::string& text, const std::string& source) {
  const Reader r(source);
  const auto root = parse(text, source);
  r.only(root, "", {"name", "seed", "trials", "threads", "window", "network", "detectors", "calibration",
                    "responses", "settings", "probes", "moments"});
  experiment::ExperimentConfig c;
  c.name = r.get<std::string>(root, "", "name", c.name);
  c.seed = r.get<std::uint64_t>(root, "", "seed", c.seed);
  c.trials = r.get<std::uint64_t>(root, "", "trials", c.trials);
  c.threads = r.get<unsigned>(root, "", "threads", c.threads);
  c.window = r.get<double>(root, "", "window", c.window);

  const auto net = r.required(root, "", "network");
  const auto det = r.required(root, "", "detectors");
  r.expect_map(net, "network");
  r.only(det, "detectors", {"ports", "thresholds", "efficiency"});
  c.network = load_network(r, net, det);

  const auto eff = r.required(det, "detectors", "efficiency");
  if (eff.IsScalar()) c.efficiency.eta.assign(c.network.ports.size(), r.as<double>(eff, "detectors.efficiency"));
  else c.efficiency.eta = r.list<double>(eff, "detectors.efficiency");

  if (const auto cal = root["calibration"]) {
    r.only(cal, "calibration", {"K_m", "K_j", "brightest"});
    c.calibration.K_m = detail::auto_or_number(r, cal["K_m"], "calibration.K_m");
    c.calibration.K_j = detail::auto_or_number(r, cal["K_j"], "calibration.K_j");
    c.calibration.brightest = r.get<double>(cal, "calibration", "brightest", c.calibration.brightest);
  }
  if (const auto resp = root["responses"]) {
    r.only(resp, "responses", {"marginal", "joint", "synthesis_samples"});
    c.marginal_template = detail::response_template(r, resp["marginal"], "responses.marginal");
    c.joint_template = detail::response_template(r, resp["joint"], "responses.joint");
    c.synthesis_samples = r.get<std::size_t>(resp, "responses", "synthesis_samples", c.synthesis_samples);
  }
  c.settings = detail::settings(r, r.required(root, "", "settings"), "settings");
  if (const auto pr = root["probes"]) {
    r.only(pr, "probes", {"fair_sampling", "enhancement", "bank_size", "inner", "enhancement_phi", "enhancement_port"});
    c.probes.fair_sampling = r.get<bool>(pr, "probes", "fair_sampling", false);
    c.probes.enhancement = r.get<bool>(pr, "probes", "enhancement", false);
    c.probes.bank_size = r.get<std::size_t>(pr, "probes", "bank_size", c.probes.bank_size);
    c.probes.inner = r.get<std::size_t>(pr, "probes", "inner", c.probes.inner);
    if (pr["enhancement_phi"]) c.probes.enhancement_phi = r.as<double>(pr["enhancement_phi"], "probes.enhancement_phi") * kDegree;
    c.probes.enhancement_port = r.get<std::size_t>(pr, "probes", "enhancement_port", 0);
  }
  if (const auto mo = root["moments"]) {
    r.only(mo, "moments", {"trials", "settings"});
    c.moment_trials = r.get<std::uint64_t>(mo, "moments", "trials", 0);
    c.moment_settings = detail::settings(r, r.required(mo, "moments", "settings"), "moments.settings");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

inline experiment::ExperimentConfig load_experiment(const std::string& path) {
  return load_experiment_text(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Kot model

struct KotConfig {
  std::string name = "kot";
  kot::KotModel model;
  kot::RunOptions run;
  std::vector<double> sweep{0.9, 0.99, 1.0};
};

inline KotConfig load_kot_text(const std::string& text, const std::string& source) {
  const Reader r(source);
  const auto root = parse(text, source);
  r.only(root, "", {"name", "seed", "trials", "threads", "lambdas", "observables", "detector", "offset_bins", "sweep"});
  KotConfig c;
  c.name = r.get<std::string>(root, "", "name", c.name);
  c.run.seed = r.get<std::uint64_t>(root, "", "seed", 1);
  c.run.trials = r.get<std::uint64_t>(root, "", "trials", 1000000);
  c.run.threads = r.get<unsigned>(root, "", "threads", 1);
  const auto lam = r.required(root, "", "lambdas");
  r.only(lam, "lambdas", {"rho", "gating_weight"});
  c.model.rho = r.list<double>(r.required(lam, "lambdas", "rho"), "lambdas.rho");
  c.model.gating_weight = r.list<double>(r.required(lam, "lambdas", "gating_weight"), "lambdas.gating_weight");
  const auto obs = r.required(root, "", "observables");
  if (!obs.IsSequence()) r.fail(obs, "observables", "expected a list");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto p = "observables[" + std::to_string(i) + "]";
    r.only(obs[i], p, {"name", "values", "q1_probability", "time_modulation", "coefficient"});
    kot::Observable o;
    o.name = r.get<std::string>(obs[i], p, "name", "Q" + std::to_string(i + 1));
    if (obs[i]["values"]) {
      const auto v = r.list<double>(obs[i]["values"], p + ".values");
      if (v.size() != 2) r.fail(obs[i]["values"], p + ".values", "expected [q1, q2]");
      o.values = {v[0], v[1]};
    }
    o.q1_probability = r.list<double>(r.required(obs[i], p, "q1_probability"), p + ".q1_probability");
    o.time_modulation = r.get<double>(obs[i], p, "time_modulation", 0.0);
    o.coefficient = r.get<double>(obs[i], p, "coefficient", 1.0);
    c.model.observables.push_back(std::move(o));
  }
  const auto det = r.required(root, "", "detector");
  r.only(det, "detector", {"curve", "window"});
  c.model.detector.curve = r.list<double>(r.required(det, "detector", "curve"), "detector.curve");
  c.model.detector.window = r.get<double>(det, "detector", "window", 1.0);
  c.model.offset_bins = r.get<std::size_t>(root, "", "offset_bins", 0);
  if (root["sweep"]) c.sweep = r.list<double>(root["sweep"], "sweep");
  if (c.run.trials == 0) r.fail(root["trials"], "trials", "must be at least 1");
  try {
    c.model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

inline KotConfig load_kot(const std::string& path) { return load_kot_text(read_file(path), path); }

// ---------------------------------------------------------------------------
// Discrete hidden-variable model

struct ModelFile {
  foundations::DiscreteLhvModel model;
  std::size_t support_bound = foundations::kDefaultSupportBound;
};

inline ModelFile load_model_text(const std::string& text, const std::string& source) {
  const Reader r(source);
  const auto root = parse(text, source);
  r.only(root, "", {"name", "lambdas", "measurements", "responses", "joints", "noise", "support_bound"});
  ModelFile f;
  auto& m = f.model;
  m.name = r.get<std::string>(root, "", "name", "model");
  f.support_bound = r.get<std::size_t>(root, "", "support_bound", f.support_bound);

  const auto lam = r.required(root, "", "lambdas");
  r.only(lam, "lambdas", {"rho", "labels"});
  m.rho = r.list<double>(r.required(lam, "lambdas", "rho"), "lambdas.rho");
  if (lam["labels"]) m.lambda_labels = r.list<std::string>(lam["labels"], "lambdas.labels");
  else
    for (std::size_t l = 0; l < m.rho.size(); ++l) m.lambda_labels.push_back("lambda" + std::to_string(l));
  if (m.lambda_labels.size() != m.rho.size()) r.fail(lam, "lambdas.labels", "expected one label per lambda");

  const auto meas = r.required(root, "", "measurements");
  if (!meas.IsSequence()) r.fail(meas, "measurements", "expected a list");
  for (std::size_t i = 0; i < meas.size(); ++i) {
    const auto p = "measurements[" + std::to_string(i) + "]";
    r.only(meas[i], p, {"name", "outcomes"});
    m.measurements.push_back({r.need<std::string>(meas[i], p, "name"),
                              r.list<double>(r.required(meas[i], p, "outcomes"), p + ".outcomes")});
  }
  auto index_of = [&](const YAML::Node& n, const std::string& path) -> std::size_t {
    const auto name = r.as<std::string>(n, path);
    for (std::size_t i = 0; i < m.measurements.size(); ++i)
      if (m.measurements[i].name == name) return i;
    r.fail(n, path, "unknown measurement '" + name + "'");
  };
  auto table = [&](const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) r.fail(n, path, "expected a list of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n.size(); ++i) rows.push_back(r.list<double>(n[i], path + "[" + std::to_string(i) + "]"));
    return rows;
  };

  if (const auto js = root["joints"]) {
    if (!js.IsSequence()) r.fail(js, "joints", "expected a list");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const auto p = "joints[" + std::to_string(i) + "]";
      r.only(js[i], p, {"first", "second", "p"});
      foundations::JointTable t;
      t.first = index_of(r.required(js[i], p, "first"), p + ".first");
      t.second = index_of(r.required(js[i], p, "second"), p + ".second");
      const auto per = r.required(js[i], p, "p");
      if (!per.IsSequence() || per.size() != m.rho.size()) r.fail(per, p + ".p", "expected one table per lambda");
      for (std::size_t l = 0; l < per.size(); ++l) {
        const auto rows = table(per[l], p + ".p[" + std::to_string(l) + "]");
        const auto na = m.measurements[t.first].outcomes.size(), nb = m.measurements[t.second].outcomes.size();
        if (rows.size() != na) r.fail(per[l], p + ".p", "table rows must match the outcomes of the first measurement");
        Eigen::MatrixXd mat(na, nb);
        for (std::size_t a = 0; a < na; ++a) {
          if (rows[a].size() != nb) r.fail(per[l][a], p + ".p", "table columns must match the second measurement");
          for (std::size_t b = 0; b < nb; ++b) mat(a, b) = rows[a][b];
        }
        t.p.push_back(mat);
      }
      m.joints.push_back(std::move(t));
    }
  }
  if (const auto rs = root["responses"]) {
    r.expect_map(rs, "responses");
    m.response.assign(m.measurements.size(), {});
    for (const auto& kv : rs) {
      const auto key = kv.first.as<std::string>();
      const auto idx = index_of(kv.first, "responses");
      m.response[idx] = table(kv.second, "responses." + key);
    }
    for (std::size_t i = 0; i < m.measurements.size(); ++i)
      if (m.response[i].empty() && m.joints.empty())
        r.fail(rs, "responses." + m.measurements[i].name, "missing response table");
  }
  if (const auto nz = root["noise"]) {
    r.only(nz, "noise", {"first", "second", "shared", "xi_a", "xi_b", "a", "b"});
    foundations::LocalNoise n;
    n.first = index_of(r.required(nz, "noise", "first"), "noise.first");
    n.second = index_of(r.required(nz, "noise", "second"), "noise.second");
    n.shared = r.get<bool>(nz, "noise", "shared", false);
    n.xi_a = r.list<double>(r.required(nz, "noise", "xi_a"), "noise.xi_a");
    if (nz["xi_b"]) n.xi_b = r.list<double>(nz["xi_b"], "noise.xi_b");
    auto idx_table = [&](const char* key) {
      std::vector<std::vector<std::size_t>> out;
      const auto t = table(r.required(nz, "noise", key), std::string("noise.") + key);
      for (const auto& row : t) {
        std::vector<std::size_t> v;
        for (double x : row) v.push_back(static_cast<std::size_t>(x));
        out.push_back(v);
      }
      return out;
    };
    n.a = idx_table("a");
    n.b = idx_table("b");
    m.noise = n;
  }
  try {
    if (m.noise && m.joints.empty()) {
      const auto noise = *m.noise;
      m = foundations::integrate_local_noise(m, noise);
      m.noise = noise;
    }
    if (!root["responses"]) {
      if (m.joints.empty()) r.fail(root, "responses", "missing required field (or give joints or noise)");
      foundations::complete_marginals(m);
    }
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return f;
}

inline ModelFile load_model(const std::string& path) { return load_model_text(read_file(path), path); }

}  // namespace zpfsim::config
