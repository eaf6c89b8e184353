#pragma once

#include <optional>
#include <string_view>

#include "cpr/bpdn.hpp"
#include "cpr/ensembles.hpp"
#include "cpr/phaselift.hpp"
#include "cpr/signals.hpp"

namespace cpr {

enum class EtaSource { kExplicit, kOracle, kEstimated };
std::string_view to_string(EtaSource s);

struct RecoveryOptions {
  PhaseLiftOptions phaselift;
  BpdnOptions bpdn;
  // Precedence: eta > oracle (needs ground truth) > estimate_stage1_noise.
  std::optional<double> eta;
  bool oracle_eta = false;
  // Least-squares refit of the stage-2 estimate on its support, undoing the
  // l1 shrinkage. Entries above debias_threshold * max |x_k| form the support.
  bool debias = true;
  double debias_threshold = 1e-2;
  double success_threshold = 1e-5;
};

// Known signal for metrics. The recovery path only reads it to report errors
// and, when oracle_eta is set, to size the stage-2 constraint.
struct GroundTruth {
  CVector x;
};

struct StageSummary {
  double residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  bool converged = false;
};

struct RecoveryResult {
  CVector x_hat;
  CVector y_hat;
  std::optional<ErrorReport> error;
  StageSummary stage1;
  StageSummary stage2;
  double stage1_top_eigenvalue = 0.0;
  double stage1_second_eigenvalue = 0.0;
  double eta_used = 0.0;
  EtaSource eta_source = EtaSource::kEstimated;
  bool debiased = false;
  std::optional<bool> success;
  double total_seconds = 0.0;

  bool converged() const { return stage1.converged && stage2.converged; }
};

// Replaces z by the least-squares fit of y on the columns where
// |z_k| > threshold * max |z|. Skipped (returns false) when that support is
// empty, has at least as many columns as C has rows, or is rank deficient.
bool debias(const CMatrix& C, const CVector& y, double threshold, CVector& z);

// Stage 1 recovers y ~ C x up to phase from b; stage 2 decodes x from y.
RecoveryResult recover(const MeasurementEnsemble& ensemble, const RVector& b, const RecoveryOptions& opts = {},
                       const GroundTruth* truth = nullptr);

// Two terms of the composed error bound with unit constants:
//   best_s_term_error(x, s, l1) / sqrt(s)   and   ||n||_1 / (m_tilde ||C x||_2).
// Trend monitoring only; the true constants are unknown.
struct CprBoundReport {
  double compressibility_term = 0.0;
  double noise_term = 0.0;
  double aligned_error = 0.0;
  double ratio = 0.0;  // aligned_error / (terms + floor)
  double floor = 0.0;
  bool exact_recovery_regime = false;
};

// `floor` keeps the ratio finite when both terms vanish; default
// success_threshold * ||x||.
CprBoundReport check_cpr_error_bound(const RecoveryResult& result, const CVector& x, std::size_t s,
                                     const RVector& noise, const MeasurementEnsemble& ensemble,
                                     std::optional<double> floor = std::nullopt, double success_threshold = 1e-5);

}  // namespace cpr
