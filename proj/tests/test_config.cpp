#include <gtest/gtest.h>

#include <string>

#include "zpfsim/config.hpp"
#include "zpfsim/io.hpp"

using namespace zpfsim;

namespace {

const std::string kDir = std::string(ZPFSIM_SOURCE_DIR) + "/configs/";

const char* kMinimal = R"(name: t
network:
  preset: singlet_pbs
  gain: 0.1
detectors:
  efficiency: 0.5
settings: chsh
)";

std::string error_of(const std::string& text) {
  try {
    config::load_experiment_text(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ExperimentConfig, MinimalUsesDefaults) {
  const auto c = config::load_experiment_text(kMinimal, "cfg.yaml");
  EXPECT_EQ(c.settings.size(), 4u);
  EXPECT_EQ(c.efficiency.eta, std::vector<double>(4, 0.5));
  EXPECT_FALSE(c.calibration.K_m.has_value());
  EXPECT_EQ(c.marginal_template.kind, synth::TemplateKind::Constant);
  EXPECT_EQ(c.trials, 1000000u);
}

TEST(ExperimentConfig, MissingDetectorSectionNamesField) {
  const auto e = error_of("name: t\nnetwork:\n  preset: singlet_pbs\n  gain: 0.1\nsettings: chsh\n");
  EXPECT_NE(e.find("detectors"), std::string::npos) << e;
  EXPECT_NE(e.find("missing required field"), std::string::npos) << e;
}

TEST(ExperimentConfig, ErrorsCarryLineNumbers) {
  std::string text = kMinimal;
  text += "probes:\n  fair_sampling: maybe\n";
  const auto e = error_of(text);
  EXPECT_NE(e.find("cfg.yaml:9"), std::string::npos) << e;
  EXPECT_NE(e.find("probes.fair_sampling"), std::string::npos) << e;
}

TEST(ExperimentConfig, UnknownFieldRejectedAtItsLine) {
  std::string text = kMinimal;
  text.insert(text.find("settings"), "detector:\n  efficiency: 1\n");
  const auto e = error_of(text);
  EXPECT_NE(e.find("cfg.yaml:7"), std::string::npos) << e;
  EXPECT_NE(e.find("unknown field"), std::string::npos) << e;
}

TEST(ExperimentConfig, SyntaxErrorHasLine) {
  const auto e = error_of("name: t\nnetwork: [1, 2\n");
  EXPECT_NE(e.find("cfg.yaml:"), std::string::npos) << e;
}

TEST(ExperimentConfig, RejectsBadValues) {
  std::string eff = kMinimal;
  eff.replace(eff.find("0.5"), 3, "[0.5, 0.5]");
  EXPECT_NE(error_of(eff).find("efficiency"), std::string::npos);
  std::string preset = kMinimal;
  preset.replace(preset.find("singlet_pbs"), 11, "mystery");
  EXPECT_NE(error_of(preset).find("unknown preset"), std::string::npos);
  std::string angles = kMinimal;
  angles.replace(angles.find("chsh"), 4, "[[0, 1, 2]]");
  EXPECT_NE(error_of(angles).find("settings[0]"), std::string::npos);
}

TEST(ExperimentConfig, ExplicitNetworkMatchesPreset) {
  auto explicit_cfg = config::load_experiment(kDir + "explicit_pbs.yaml");
  const auto preset = optics::presets::singlet_pbs(0.1);
  EXPECT_EQ(io::describe(explicit_cfg.network).dump(), io::describe(preset).dump());
}

TEST(ExperimentConfig, ExplicitNetworkUndefinedModeRejected) {
  std::string text = config::read_file(kDir + "explicit_pbs.yaml");
  text.replace(text.find("[0, 5]"), 6, "[0, 9]");
  EXPECT_THROW(config::load_experiment_text(text, "x.yaml"), ConfigError);
}

TEST(ExperimentConfig, BundledConfigsLoad) {
  for (const char* f : {"singlet.yaml", "vacuum.yaml", "singlet_shaped.yaml", "polarizer_enhancement.yaml",
                        "explicit_pbs.yaml"})
    EXPECT_NO_THROW(config::load_experiment(kDir + f)) << f;
  const auto s = config::load_experiment(kDir + "singlet.yaml");
  EXPECT_EQ(s.moment_settings.size(), 12u);
}

TEST(KotConfig, LoadsAndRejectsZeroTrials) {
  const auto k = config::load_kot(kDir + "kot_correlated.yaml");
  EXPECT_EQ(k.model.lambdas(), 8u);
  EXPECT_NEAR(k.model.detector.min_rate(), 0.9, 1e-12);
  std::string text = config::read_file(kDir + "kot_correlated.yaml");
  text.replace(text.find("trials: 400000"), 14, "trials: 0");
  EXPECT_THROW(config::load_kot_text(text, "k.yaml"), ConfigError);
}

TEST(ModelFile, BundledModels) {
  const auto c = config::load_model(kDir + "models/counterexample.yaml");
  ASSERT_EQ(c.model.joints.size(), 1u);
  EXPECT_EQ(c.model.joints[0].p[0](0, 0), 0.5);
  EXPECT_EQ(c.model.response[0][0][0], 0.5);
  const auto n = config::load_model(kDir + "models/shared_noise.yaml");
  EXPECT_EQ(n.model.joints[0].p[0](0, 0), 0.5);
  EXPECT_EQ(n.model.joints[0].p[0](0, 1), 0.0);
}

TEST(ModelFile, MalformedTableRejected) {
  const char* bad = R"(name: bad
lambdas:
  rho: [1.0]
measurements:
  - {name: A, outcomes: [1, -1]}
  - {name: B, outcomes: [1, -1]}
joints:
  - first: A
    second: B
    p:
      - [[0.5, 0.2], [0.0, 0.5]]
)";
  EXPECT_THROW(config::load_model_text(bad, "m.yaml"), ConfigError);
  const char* unknown = R"(name: bad
lambdas:
  rho: [1.0]
measurements:
  - {name: A, outcomes: [1, -1]}
joints:
  - {first: A, second: C, p: [[[1, 0], [0, 0]]]}
)";
  try {
    config::load_model_text(unknown, "m.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("m.yaml:7"), std::string::npos) << e.what();
  }
}

TEST(Io, Fnv1aKnownVectors) {
  EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(Io, TableLayout) {
  io::Table t({"x", "y"});
  t.row().add(1).add(0.5);
  t.row().add("a").add(1.0 / 3.0);
  EXPECT_EQ(t.str(), "x\ty\n1\t0.5\na\t0.333333333333\n");
  io::Table bad({"x", "y"});
  bad.row().add(1);
  EXPECT_THROW(bad.str(), ContractViolation);
}

TEST(Io, ManifestDigestTracksResolvedConfig) {
  const auto a = config::load_experiment_text(kMinimal, "a.yaml");
  // Comments and key order do not change the resolved configuration.
  std::string reordered = "# comment\nsettings: chsh\n";
  reordered += std::string(kMinimal).substr(0, std::string(kMinimal).find("settings"));
  const auto b = config::load_experiment_text(reordered, "b.yaml");
  io::RunManifest ma, mb;
  ma.config = io::describe(a);
  mb.config = io::describe(b);
  EXPECT_EQ(ma.digest(), mb.digest());
  auto c = a;
  c.seed += 1;
  io::RunManifest mc;
  mc.config = io::describe(c);
  EXPECT_NE(ma.digest(), mc.digest());
}
