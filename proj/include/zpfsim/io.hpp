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

// Run outputs: tab-separated tables, JSON summaries and the run manifest.
// Nothing here records wall time or thread counts, so equal inputs give
// byte-identical files.

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "zpfsim/config.hpp"
#include "zpfsim/errors.hpp"

#ifndef ZPFSIM_VERSION
#define ZPFSIM_VERSION "0.0.0"
#endif

namespace zpfsim::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = ZPFSIM_VERSION;

/// Fixed textual form of a number: 12 significant digits.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Rounds through the same text form so JSON and TSV agree.
inline double rounded(double v) { return std::isfinite(v) ? std::stod(num(v)) : v; }

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Tables

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  Table& row() {
    rows_.emplace_back();
    return *this;
  }
  Table& add(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }
  Table& add(const char* s) { return add(std::string(s)); }
  Table& add(double v) { return add(num(v)); }
  template <class I>
    requires std::is_integral_v<I>
  Table& add(I v) {
    return add(std::to_string(v));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += '\t';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) {
      require(r.size() == columns_.size(), "table row width does not match its header");
      line(r);
    }
    return out;
  }

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Output directory

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& text) const {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
  }

  void write(const std::string& name, const Table& t) const { write(name, t.str()); }
  void write(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

  const std::filesystem::path& path() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Resolved configurations (all defaults spelled out)

inline json describe(const synth::ResponseTemplate& t) {
  return {{"kind", synth::template_name(t.kind)},
          {"threshold", t.threshold},
          {"threshold_second", t.second_threshold()},
          {"cap", t.cap},
          {"bins", t.bins}};
}

inline json describe(const optics::OpticalNetwork& net) {
  json j;
  json modes = json::array();
  for (const auto& m : net.modes) modes.push_back(m.label);
  j["modes"] = modes;
  j["source_modes"] = net.source_modes;
  j["quadrature_variance"] = net.quadrature_variance;
  json devs = json::array();
  for (const auto& d : net.devices) {
    json dj{{"name", d.name}};
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, optics::Crystal>) {
            dj["type"] = "crystal";
            dj["gain"] = k.gain;
            dj["pump_phase"] = k.pump_phase;
            json pairs = json::array();
            for (const auto& p : k.pairs) pairs.push_back({p.first, p.second, p.phase});
            dj["pairs"] = pairs;
          } else if constexpr (std::is_same_v<T, optics::PolarizingBeamSplitter>) {
            dj["type"] = "pbs";
            dj["signal"] = k.signal;
            dj["injected"] = k.injected;
          } else if constexpr (std::is_same_v<T, optics::Polarizer>) {
            dj["type"] = "polarizer";
            dj["signal"] = k.signal;
            dj["injected"] = k.injected;
          } else {
            dj["type"] = "free";
            dj["phase"] = k.phase;
            dj["modes"] = k.modes;
          }
        },
        d.kind);
    if (d.analyzer_side) dj["analyzer"] = optics::side_name(*d.analyzer_side);
    dj["removable"] = d.removable;
    devs.push_back(dj);
  }
  j["devices"] = devs;
  json ports = json::array();
  for (const auto& p : net.ports)
    ports.push_back({{"id", p.id},
                     {"name", p.name},
                     {"modes", p.collected_modes},
                     {"bare_modes", p.bare_modes},
                     {"side", optics::side_name(p.side)},
                     {"outcome", p.outcome},
                     {"threshold", p.threshold},
                     {"vacuum_baseline", p.vacuum_baseline}});
  j["ports"] = ports;
  return j;
}

inline json describe_settings(const std::vector<bell::Setting>& s) {
  json out = json::array();
  for (const auto& x : s) out.push_back({rounded(x.phi_a / config::kDegree), rounded(x.phi_b / config::kDegree)});
  return out;
}

inline json describe(const experiment::ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["window"] = c.window;
  j["network"] = describe(c.network);
  j["efficiency"] = c.efficiency.eta;
  j["calibration"] = {{"K_m", c.calibration.K_m ? json(*c.calibration.K_m) : json("auto")},
                      {"K_j", c.calibration.K_j ? json(*c.calibration.K_j) : json("auto")},
                      {"brightest", c.calibration.brightest}};
  j["responses"] = {{"marginal", describe(c.marginal_template)},
                    {"joint", describe(c.joint_template)},
                    {"synthesis_samples", c.synthesis_samples}};
  j["settings_deg"] = describe_settings(c.settings);
  j["probes"] = {{"fair_sampling", c.probes.fair_sampling},
                 {"enhancement", c.probes.enhancement},
                 {"bank_size", c.probes.bank_size},
                 {"inner", c.probes.inner},
                 {"enhancement_phi_deg",
                  c.probes.enhancement_phi ? json(rounded(*c.probes.enhancement_phi / config::kDegree)) : json(nullptr)},
                 {"enhancement_port", c.probes.enhancement_port}};
  j["moments"] = {{"trials", c.moment_trials}, {"settings_deg", describe_settings(c.moment_settings)}};
  return j;
}

inline json describe(const config::KotConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.run.seed;
  j["trials"] = c.run.trials;
  j["lambdas"] = {{"rho", c.model.rho}, {"gating_weight", c.model.gating_weight}};
  json obs = json::array();
  for (const auto& o : c.model.observables)
    obs.push_back({{"name", o.name},
                   {"values", o.values},
                   {"q1_probability", o.q1_probability},
                   {"time_modulation", o.time_modulation},
                   {"coefficient", o.coefficient}});
  j["observables"] = obs;
  j["detector"] = {{"curve", c.model.detector.curve}, {"window", c.model.detector.window}};
  j["offset_bins"] = c.model.offset_bins;
  j["sweep"] = c.sweep;
  return j;
}

inline json describe(const config::ModelFile& f) {
  const auto& m = f.model;
  json j;
  j["name"] = m.name;
  j["lambdas"] = {{"rho", m.rho}, {"labels", m.lambda_labels}};
  json meas = json::array();
  for (const auto& x : m.measurements) meas.push_back({{"name", x.name}, {"outcomes", x.outcomes}});
  j["measurements"] = meas;
  j["responses"] = m.response;
  json joints = json::array();
  for (const auto& t : m.joints) {
    json per = json::array();
    for (const auto& p : t.p) {
      json rows = json::array();
      for (Eigen::Index a = 0; a < p.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < p.cols(); ++b) row.push_back(p(a, b));
        rows.push_back(row);
      }
      per.push_back(rows);
    }
    joints.push_back({{"first", m.measurements[t.first].name}, {"second", m.measurements[t.second].name}, {"p", per}});
  }
  j["joints"] = joints;
  j["local_noise"] = m.noise.has_value();
  j["support_bound"] = f.support_bound;
  return j;
}

// ---------------------------------------------------------------------------
// Manifest

struct StageRecord {
  std::string name;
  double residual = 0.0;  ///< worst solver residual; 0 when not applicable
  double se = 0.0;        ///< largest standard error reported by the stage
};

struct RunManifest {
  std::string command;
  json config;  ///< resolved, with defaults
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  std::string digest() const { return hex(fnv1a(config.dump())); }

  json to_json() const {
    json j;
    j["tool"] = "zpfsim";
    j["version"] = kVersion;
    j["command"] = command;
    j["config_digest"] = digest();
    j["seed"] = seed;
    j["modules"] = {{"zpf-core", kVersion},      {"optics-network", kVersion}, {"detection-synth", kVersion},
                    {"bell-harness", kVersion},  {"foundations-lab", kVersion}, {"kot-analyzer", kVersion},
                    {"cli", kVersion}};
    json st = json::array();
    for (const auto& s : stages) st.push_back({{"stage", s.name}, {"residual", rounded(s.residual)}, {"se", rounded(s.se)}});
    j["stages"] = st;
    j["config"] = config;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Kot trial log

inline Table trial_log_table(const kot::TrialLog& log) {
  Table t({"trial", "lambda_id", "observable", "t", "outcome"});
  for (const auto& r : log) {
    t.row().add(r.trial).add(r.lambda).add(r.observable);
    t.add(r.t ? num(*r.t) : std::string("NA")).add(r.outcome ? num(*r.outcome) : std::string("NA"));
  }
  return t;
}

}  // namespace zpfsim::io
