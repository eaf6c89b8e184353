#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cpr/config.hpp"

namespace cpr {
namespace {

Json parse(const char* text) { return Json::parse(text); }

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Override, ParsesJsonOrString) {
  Json root = Json::object();
  apply_override(root, "n=64");
  apply_override(root, "bpdn.tol=1e-6");
  apply_override(root, "cs_kind=subsampled-dft");
  apply_override(root, "snr_db=[20,30]");
  apply_override(root, "recovery.debias=false");
  EXPECT_EQ(root["n"], 64);
  EXPECT_EQ(root["bpdn"]["tol"], 1e-6);
  EXPECT_EQ(root["cs_kind"], "subsampled-dft");
  EXPECT_EQ(root["snr_db"].size(), 2u);
  EXPECT_EQ(root["recovery"]["debias"], false);
  EXPECT_THROW(apply_override(root, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(root, "a..b=1"), ConfigError);
  EXPECT_THROW(apply_override(root, "n.x=1"), ConfigError);
}

TEST(Solver, ReadsSectionsAndDefaults) {
  const RecoveryOptions d = recovery_options_from_json(Json::object());
  EXPECT_EQ(d.bpdn.tol, 1e-8);
  EXPECT_EQ(d.phaselift.max_iters, 5000);
  EXPECT_TRUE(d.debias);
  const RecoveryOptions o = recovery_options_from_json(
      parse(R"({"phaselift": {"lambda": 0.5, "kappa": 3}, "bpdn": {"rho": 2, "adaptive": false},
                "recovery": {"eta": 0.1, "debias": false}, "success_threshold": 1e-4})"));
  EXPECT_EQ(*o.phaselift.lambda, 0.5);
  EXPECT_EQ(o.phaselift.kappa, 3.0);
  EXPECT_EQ(o.bpdn.rho, 2.0);
  EXPECT_FALSE(o.bpdn.adaptive);
  EXPECT_EQ(*o.eta, 0.1);
  EXPECT_FALSE(o.debias);
  EXPECT_EQ(o.success_threshold, 1e-4);
}

TEST(Solver, RejectsUnknownAndBadValues) {
  EXPECT_NE(error_of([] { recovery_options_from_json(parse(R"({"bpdn": {"tolerance": 1}})")); }).find("bpdn.tolerance"),
            std::string::npos);
  EXPECT_THROW(recovery_options_from_json(parse(R"({"bpdn": {"tol": "small"}})")), ConfigError);
  EXPECT_THROW(recovery_options_from_json(parse(R"({"bpdn": {"rho": 0}})")), ConfigError);
  EXPECT_THROW(recovery_options_from_json(parse(R"({"recovery": {"eta": -1}})")), ConfigError);
  EXPECT_THROW(recovery_options_from_json(parse(R"({"phaselift": {"max_iters": -3}})")), ConfigError);
  EXPECT_THROW(recovery_options_from_json(parse(R"({"phaselift": 3})")), ConfigError);
}

TEST(Experiment, RequiresBaseSeed) {
  EXPECT_NE(error_of([] { experiment_config_from_json(parse(R"({"n": 64})"), Experiment::kNoise); }).find("base_seed"),
            std::string::npos);
}

TEST(Experiment, ParsesFields) {
  const ExperimentConfig c = experiment_config_from_json(
      parse(R"({"base_seed": 9, "n": 1024, "s": 5, "m_tilde_coeff": 14, "trials": 25,
                "snr_db": [20, 40, "noiseless"], "cs_kind": "fourier-combination", "fixed_ensemble": true,
                "record_timings": false, "bpdn": {"tol": 1e-7}})"),
      Experiment::kNoise);
  EXPECT_EQ(c.base_seed, 9u);
  EXPECT_EQ(c.n, 1024u);
  EXPECT_EQ(*c.m_tilde_coeff, 14.0);
  EXPECT_EQ(c.trials, 25u);
  ASSERT_EQ(c.snr_list.size(), 3u);
  EXPECT_EQ(c.snr_list[1], 40.0);
  EXPECT_EQ(c.snr_list[2], kNoiseless);
  EXPECT_EQ(c.cs_kind, CsKind::kFourierCombination);
  EXPECT_TRUE(c.fixed_ensemble);
  EXPECT_FALSE(c.record_timings);
  EXPECT_EQ(c.solver.bpdn.tol, 1e-7);
}

TEST(Experiment, Validation) {
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": 1, "bogus": 1})"), Experiment::kNoise), ConfigError);
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": 1, "m_tilde": 9, "m_tilde_coeff": 2})"),
                                           Experiment::kNoise),
               ConfigError);
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": 1, "snr_db": [20]})"), Experiment::kRuntime),
               ConfigError);
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": 1, "cs_kind": "dft"})"), Experiment::kNoise),
               ConfigError);
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": -1})"), Experiment::kNoise), ConfigError);
  EXPECT_THROW(experiment_config_from_json(parse(R"({"base_seed": 1, "trials": 0})"), Experiment::kNoise),
               ConfigError);
}

TEST(Experiment, EchoRoundTrips) {
  const ExperimentConfig c = experiment_config_from_json(
      parse(R"({"base_seed": 3, "s_list": [1, 2], "snr_db": ["noiseless"], "phaselift": {"lambda": 1e-3}})"),
      Experiment::kMinMeasurements);
  Json echo = to_json(c, Experiment::kMinMeasurements);
  EXPECT_EQ(echo["experiment"], "min-measurements");
  echo.erase("experiment");
  const ExperimentConfig again = experiment_config_from_json(echo, Experiment::kMinMeasurements);
  EXPECT_EQ(to_json(again, Experiment::kMinMeasurements).dump(), to_json(c, Experiment::kMinMeasurements).dump());
}

TEST(Recover, RequiredKeys) {
  EXPECT_NE(error_of([] { recover_config_from_json(parse(R"({"s": 2})")); }).find("'n'"), std::string::npos);
  EXPECT_NE(error_of([] { recover_config_from_json(parse(R"({"ensemble": "e.json"})")); }).find("measurements"),
            std::string::npos);
  const RecoverConfig c = recover_config_from_json(parse(R"({"n": 64, "s": 2, "snr_db": "inf", "seed": 5})"));
  EXPECT_EQ(*c.n, 64u);
  EXPECT_EQ(c.snr_db, kNoiseless);
  EXPECT_EQ(c.seed, 5u);
  Json echo = to_json(c);
  EXPECT_EQ(recover_config_from_json(echo).seed, 5u);
}

TEST(CheckMatrix, DefaultsAndKinds) {
  const CheckMatrixConfig c = check_matrix_config_from_json(Json::object());
  EXPECT_EQ(c.n, 12u);
  EXPECT_EQ(c.m, 6u);
  EXPECT_EQ(c.kind, "real-gaussian");
  EXPECT_NO_THROW(check_matrix_config_from_json(parse(R"({"kind": "orthonormal"})")));
  EXPECT_THROW(check_matrix_config_from_json(parse(R"({"kind": "random"})")), ConfigError);
  EXPECT_THROW(check_matrix_config_from_json(parse(R"({"s": 0})")), ConfigError);
}

TEST(Json, NumberTags) {
  EXPECT_EQ(number_or_tag(1.5), 1.5);
  EXPECT_EQ(number_or_tag(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(number_or_tag(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(number_or_tag(std::nan("")), "nan");
}

TEST(Json, LoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "cpr_config_test.json";
  std::ofstream(path) << "{\"n\": 3";
  EXPECT_THROW(load_json_file(path), ConfigError);
  std::ofstream(path) << "{\"n\": 3}";
  EXPECT_EQ(load_json_file(path)["n"], 3);
  std::filesystem::remove(path);
  EXPECT_THROW(load_json_file(path), ConfigError);
}

}  // namespace
}  // namespace cpr
