#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "cpr/rng.hpp"
#include "cpr/types.hpp"

namespace cpr {

enum class PhaseKind { kComplexGaussian, kSphereUniform };
enum class CsKind { kRealGaussian, kSubsampledDft, kFourierCombination };

std::string_view to_string(PhaseKind k);
std::string_view to_string(CsKind k);
PhaseKind parse_phase_kind(std::string_view s);
CsKind parse_cs_kind(std::string_view s);

// Rows of a phase-retrieval matrix. complex-gaussian: entries with real and
// imaginary parts N(0, 1/2). sphere-uniform: each row rescaled to norm sqrt(m).
CMatrix gen_phase_matrix(std::size_t m_tilde, std::size_t m, PhaseKind kind, Rng& rng);

// Compressive sensing matrix, m < n required.
//   real-gaussian:       entries N(0, 1/m)
//   subsampled-dft:      m distinct unitary DFT rows scaled by sqrt(n/m)
//   fourier-combination: G F with G m x r N(0, 1/m), F r = min(4m, n) unitary DFT rows
CMatrix gen_cs_matrix(std::size_t m, std::size_t n, CsKind kind, Rng& rng);

// Everything needed to regenerate an ensemble bit-for-bit.
struct EnsembleSpec {
  std::size_t m_tilde = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  PhaseKind phase_kind = PhaseKind::kComplexGaussian;
  CsKind cs_kind = CsKind::kRealGaussian;
  std::uint64_t seed = 0;

  bool operator==(const EnsembleSpec&) const = default;
};

// Composition A = P C of a phase-retrieval matrix P (m_tilde x m) and a
// compressive sensing matrix C (m x n). Immutable once built.
class MeasurementEnsemble {
 public:
  // Composition is materialized when m_tilde * n <= this many entries.
  static constexpr std::size_t kMaterializeLimit = std::size_t{1} << 24;

  static MeasurementEnsemble generate(const EnsembleSpec& spec);
  // Explicit factors (tests, custom ensembles). Throws on a dimension mismatch.
  MeasurementEnsemble(CMatrix P, CMatrix C, std::optional<EnsembleSpec> spec = std::nullopt);

  const CMatrix& P() const { return P_; }
  const CMatrix& C() const { return C_; }
  bool materialized() const { return A_.has_value(); }
  // Materializes on demand for callers that need the full matrix.
  CMatrix A() const { return A_ ? *A_ : CMatrix(P_ * C_); }
  const std::optional<EnsembleSpec>& spec() const { return spec_; }

  std::size_t m_tilde() const { return static_cast<std::size_t>(P_.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(C_.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(C_.cols()); }

  // A x, via the materialized product or stage-wise.
  CVector apply(const CVector& x) const;

 private:
  CMatrix P_;
  CMatrix C_;
  std::optional<CMatrix> A_;
  std::optional<EnsembleSpec> spec_;
};

// |A x|^2 entrywise.
RVector forward(const MeasurementEnsemble& ensemble, const CVector& x);

struct MagnitudeMeasurements {
  RVector b;
  RVector noise;
  std::optional<double> snr_db;  // nullopt: noiseless
  std::optional<RVector> clean;
};

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

// b = clean + sigma g with sigma set so 10 log10(|clean|^2 / |n|^2) = snr_db
// exactly for the realized g. snr_db = +inf gives noise = 0.
MagnitudeMeasurements add_noise(const RVector& clean, double snr_db, Rng& rng);

// Persistence: ensembles are stored as their regeneration spec (JSON).
void save_ensemble_spec(const EnsembleSpec& spec, const std::filesystem::path& path);
EnsembleSpec load_ensemble_spec(const std::filesystem::path& path);

// Measurement vectors as JSON {"b": [...]}.
void save_measurements(const RVector& b, const std::filesystem::path& path);
RVector load_measurements(const std::filesystem::path& path);

}  // namespace cpr
