#pragma once
// JSON configuration for the command-line tool. Every section rejects keys it
// does not know, naming the offending path. Precedence, lowest first:
// built-in defaults, config file, --set overrides, dedicated flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "cpr/bench.hpp"
#include "cpr/ensembles.hpp"
#include "cpr/pipeline.hpp"
#include "json.hpp"

namespace cpr {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json load_json_file(const std::filesystem::path& path);

// Applies "a.b.c=value"; the value is parsed as JSON when possible and kept
// as a string otherwise. Creates intermediate objects as needed.
void apply_override(Json& root, const std::string& assignment);

// Solver sections: "phaselift", "bpdn", "recovery".
RecoveryOptions recovery_options_from_json(const Json& root);
Json to_json(const RecoveryOptions& opts);

// Bench configs require base_seed.
ExperimentConfig experiment_config_from_json(const Json& root, Experiment e);
Json to_json(const ExperimentConfig& cfg, Experiment e);

struct RecoverConfig {
  // Synthetic trial: all of n, s present. File mode: ensemble + measurements.
  std::optional<std::size_t> n;
  std::optional<std::size_t> s;
  std::optional<std::size_t> m;
  std::optional<std::size_t> m_tilde;
  double m_coeff = 1.75;
  double m_tilde_factor = 8.0;
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
  PhaseKind phase_kind = PhaseKind::kComplexGaussian;
  CsKind cs_kind = CsKind::kRealGaussian;
  std::optional<std::filesystem::path> ensemble;
  std::optional<std::filesystem::path> measurements;
  RecoveryOptions solver;
};
RecoverConfig recover_config_from_json(const Json& root);
Json to_json(const RecoverConfig& cfg);

struct CheckMatrixConfig {
  std::size_t n = 12;
  std::size_t m = 6;
  std::size_t s = 1;
  // Any CsKind name, or "orthonormal" for a random unitary n x n matrix.
  std::string kind = "real-gaussian";
  std::uint64_t seed = 0;
  double rho = 0.5;
  double tau = 10.0;
  std::size_t probes = 1000;
  unsigned threads = 1;
};
CheckMatrixConfig check_matrix_config_from_json(const Json& root);
Json to_json(const CheckMatrixConfig& cfg);

// Machine-readable summaries written next to each bench CSV.
Json summary_json(const ExperimentConfig& cfg, const NoiseSweep& sweep);
Json summary_json(const ExperimentConfig& cfg, const MinMeasurements& result);
Json summary_json(const ExperimentConfig& cfg, const RuntimeScaling& result);
Json to_json(const PointSummary& ps);

// Doubles that JSON cannot hold (inf, nan) are encoded as strings.
Json number_or_tag(double v);

}  // namespace cpr
