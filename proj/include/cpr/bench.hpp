#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpr/ensembles.hpp"
#include "cpr/pipeline.hpp"

namespace cpr {

enum class Experiment { kNoise, kMinMeasurements, kRuntime };
std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view s);

// Sizes: m = ceil(m_coeff s ln(n/s)) unless m is given; m_tilde is explicit,
// or ceil(m_tilde_coeff s ln(n/s)) when that is set, or ceil(m_tilde_factor m).
struct ExperimentConfig {
  std::size_t n = 64;
  std::size_t s = 1;
  std::vector<std::size_t> n_list;  // runtime; defaults to {n}
  std::vector<std::size_t> s_list;  // min-measurements; defaults to {s}
  double m_coeff = 1.75;
  std::optional<std::size_t> m;
  std::optional<std::size_t> m_tilde;
  std::optional<double> m_tilde_coeff;
  double m_tilde_factor = 8.0;
  std::size_t trials = 100;
  std::vector<double> snr_list{kNoiseless};  // dB; kNoiseless for none
  double success_threshold = 1e-5;
  std::uint64_t base_seed = 0;
  PhaseKind phase_kind = PhaseKind::kComplexGaussian;
  CsKind cs_kind = CsKind::kRealGaussian;
  // One ensemble per config point instead of one per trial.
  bool fixed_ensemble = false;
  RecoveryOptions solver;

  // min-measurements
  double success_rate = 0.95;
  std::optional<std::size_t> m_tilde_start;  // default 2m
  std::size_t m_tilde_step = 2;
  std::optional<std::size_t> m_tilde_max;  // default 40m

  // runtime
  double budget_seconds = 300.0;

  unsigned threads = 1;
  // When false every *_seconds column is written as 0 so tables depend on
  // (config, base_seed) alone.
  bool record_timings = true;
};

std::size_t rule_m(const ExperimentConfig& cfg, std::size_t n, std::size_t s);
std::size_t rule_m_tilde(const ExperimentConfig& cfg, std::size_t n, std::size_t s, std::size_t m);

// One (n, s, m, m_tilde, snr) combination.
struct ConfigPoint {
  std::size_t n = 0;
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t m_tilde = 0;
  double snr_db = kNoiseless;

  std::uint64_t key() const;
  bool operator==(const ConfigPoint&) const = default;
};

struct TrialSeeds {
  std::uint64_t ensemble = 0;
  std::uint64_t signal = 0;
  std::uint64_t noise = 0;
};

// hash(base_seed, experiment id, config point, trial index, stream).
TrialSeeds trial_seeds(std::uint64_t base_seed, Experiment e, const ConfigPoint& p, std::size_t trial,
                       bool fixed_ensemble = false);

struct TrialRecord {
  Experiment experiment = Experiment::kNoise;
  ConfigPoint point;
  std::size_t trial = 0;
  TrialSeeds seeds;
  double relative_l2 = 0.0;  // NaN when the trial failed
  double relative_db = 0.0;
  bool success = false;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  int stage1_iters = 0;
  int stage2_iters = 0;
  double total_seconds = 0.0;
  bool converged = false;
  std::string error;  // solver exception message, if any
};

inline constexpr std::string_view kCsvHeader =
    "experiment,n,s,m,m_tilde,snr_db,trial,seed_ensemble,seed_signal,seed_noise,relative_l2,relative_db,success,"
    "stage1_seconds,stage2_seconds,stage1_iters,stage2_iters,total_seconds";

std::string csv_row(const TrialRecord& r);
TrialRecord parse_csv_row(std::string_view line);

// One seeded recovery; solver exceptions are caught into the record.
TrialRecord run_trial(const ExperimentConfig& cfg, Experiment e, const ConfigPoint& p, std::size_t trial);

// Completed (config point, trial) rows, persisted one line per trial so an
// interrupted run can resume. The first line fingerprints the config.
class Checkpoint {
 public:
  Checkpoint(std::filesystem::path path, std::string fingerprint);
  bool contains(const ConfigPoint& p, std::size_t trial) const;
  const TrialRecord& get(const ConfigPoint& p, std::size_t trial) const;
  void append(const TrialRecord& r);
  std::size_t size() const { return rows_.size(); }

 private:
  std::filesystem::path path_;
  std::vector<TrialRecord> rows_;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs `trials` trials for every point, in parallel, and returns rows in
// canonical (point order, trial index) order. Rows already in `checkpoint`
// are reused, new ones are appended to it.
std::vector<TrialRecord> run_points(const ExperimentConfig& cfg, Experiment e, const std::vector<ConfigPoint>& points,
                                    Checkpoint* checkpoint = nullptr, const ProgressFn& progress = {});

struct PointSummary {
  ConfigPoint point;
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;  // trials that threw
  double mean_relative_db = 0.0;
  double mean_relative_l2 = 0.0;
  double mean_stage1_seconds = 0.0;
  double mean_stage2_seconds = 0.0;
  double mean_total_seconds = 0.0;
};

// Aggregates rows point by point, in row order. Means skip failed trials.
std::vector<PointSummary> summarize(const std::vector<TrialRecord>& rows);

struct NoiseSweep {
  std::vector<TrialRecord> rows;
  std::vector<PointSummary> summary;
};
NoiseSweep run_noise_sweep(const ExperimentConfig& cfg, Checkpoint* checkpoint = nullptr,
                           const ProgressFn& progress = {});

struct MinMeasurementRow {
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t m_tilde_min = 0;  // last m_tilde tried when !found
  double success_rate = 0.0;
  double avg_seconds = 0.0;
  bool found = false;
};
struct MinMeasurements {
  std::vector<TrialRecord> rows;
  std::vector<MinMeasurementRow> table;
};
MinMeasurements find_min_measurements(const ExperimentConfig& cfg, Checkpoint* checkpoint = nullptr,
                                      const ProgressFn& progress = {});

struct RuntimeRow {
  std::size_t n = 0;
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t m_tilde = 0;
  double avg_total_seconds = 0.0;
  double avg_stage1_seconds = 0.0;
  double avg_stage2_seconds = 0.0;
};
struct RuntimeScaling {
  std::vector<TrialRecord> rows;
  std::vector<RuntimeRow> table;
  // Least-squares fit of stage1_seconds against n over all trials.
  double stage1_slope = 0.0;
  double stage1_slope_stderr = 0.0;
  // max / min over n of the average stage-1 time.
  double stage1_spread = 0.0;
  bool stage2_increasing = false;
  bool within_budget = true;  // every trial's total under budget_seconds
};
RuntimeScaling run_runtime_scaling(const ExperimentConfig& cfg, Checkpoint* checkpoint = nullptr,
                                   const ProgressFn& progress = {});

void write_csv(const std::vector<TrialRecord>& rows, const std::filesystem::path& path);
std::vector<TrialRecord> read_csv(const std::filesystem::path& path);

}  // namespace cpr
