#include "cpr/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace cpr {
namespace {

using json = nlohmann::json;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// m distinct values from [0, n), in draw order.
std::vector<std::size_t> sample_rows(std::size_t m, std::size_t n, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
  pool.resize(m);
  return pool;
}

// Unitary DFT rows F_{jk} = exp(-2 pi i j k / n) / sqrt(n).
CMatrix dft_rows(const std::vector<std::size_t>& rows, std::size_t n) {
  CMatrix F(idx(rows.size()), idx(n));
  const double inv = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      // Reduce j k mod n first so the angle stays small and exact.
      const auto jk = (rows[r] * k) % n;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(jk) / static_cast<double>(n);
      F(idx(r), idx(k)) = std::polar(inv, angle);
    }
  }
  return F;
}

RMatrix gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  RMatrix G(idx(rows), idx(cols));
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = stddev * rng.normal();
  return G;
}

}  // namespace

std::string_view to_string(PhaseKind k) {
  return k == PhaseKind::kComplexGaussian ? "complex-gaussian" : "sphere-uniform";
}

std::string_view to_string(CsKind k) {
  switch (k) {
    case CsKind::kRealGaussian: return "real-gaussian";
    case CsKind::kSubsampledDft: return "subsampled-dft";
    case CsKind::kFourierCombination: return "fourier-combination";
  }
  return "?";
}

PhaseKind parse_phase_kind(std::string_view s) {
  if (s == "complex-gaussian") return PhaseKind::kComplexGaussian;
  if (s == "sphere-uniform") return PhaseKind::kSphereUniform;
  throw std::invalid_argument("unknown phase matrix kind '" + std::string(s) + "'");
}

CsKind parse_cs_kind(std::string_view s) {
  if (s == "real-gaussian") return CsKind::kRealGaussian;
  if (s == "subsampled-dft") return CsKind::kSubsampledDft;
  if (s == "fourier-combination") return CsKind::kFourierCombination;
  throw std::invalid_argument("unknown compressive sensing matrix kind '" + std::string(s) + "'");
}

CMatrix gen_phase_matrix(std::size_t m_tilde, std::size_t m, PhaseKind kind, Rng& rng) {
  if (m_tilde == 0 || m == 0) throw std::invalid_argument("gen_phase_matrix: dimensions must be positive");
  CMatrix P(idx(m_tilde), idx(m));
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j) P(i, j) = rng.complex_normal();
  if (kind == PhaseKind::kSphereUniform) {
    const double radius = std::sqrt(static_cast<double>(m));
    for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) *= radius / P.row(i).norm();
  }
  return P;
}

CMatrix gen_cs_matrix(std::size_t m, std::size_t n, CsKind kind, Rng& rng) {
  if (m == 0 || m >= n) {
    throw std::invalid_argument("gen_cs_matrix: need 1 <= m < n (got m=" + std::to_string(m) +
                                ", n=" + std::to_string(n) + ")");
  }
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  switch (kind) {
    case CsKind::kRealGaussian:
      return gaussian(m, n, sd, rng).cast<cplx>();
    case CsKind::kSubsampledDft: {
      const auto rows = sample_rows(m, n, rng);
      return dft_rows(rows, n) * std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    }
    case CsKind::kFourierCombination: {
      const std::size_t r = std::min(4 * m, n);
      const auto rows = sample_rows(r, n, rng);
      const RMatrix G = gaussian(m, r, sd, rng);
      return G.cast<cplx>() * dft_rows(rows, n);
    }
  }
  throw std::invalid_argument("gen_cs_matrix: bad kind");
}

MeasurementEnsemble MeasurementEnsemble::generate(const EnsembleSpec& spec) {
  Rng phase_rng(derive_seed({spec.seed, 1}));
  Rng cs_rng(derive_seed({spec.seed, 2}));
  CMatrix P = gen_phase_matrix(spec.m_tilde, spec.m, spec.phase_kind, phase_rng);
  CMatrix C = gen_cs_matrix(spec.m, spec.n, spec.cs_kind, cs_rng);
  return MeasurementEnsemble(std::move(P), std::move(C), spec);
}

MeasurementEnsemble::MeasurementEnsemble(CMatrix P, CMatrix C, std::optional<EnsembleSpec> spec)
    : P_(std::move(P)), C_(std::move(C)), spec_(spec) {
  if (P_.cols() != C_.rows()) {
    throw std::invalid_argument("ensemble: cols(P)=" + std::to_string(P_.cols()) +
                                " != rows(C)=" + std::to_string(C_.rows()));
  }
  if (static_cast<std::size_t>(P_.rows()) * static_cast<std::size_t>(C_.cols()) <= kMaterializeLimit) {
    A_ = P_ * C_;
  }
}

CVector MeasurementEnsemble::apply(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != n()) {
    throw std::invalid_argument("ensemble apply: length(x)=" + std::to_string(x.size()) +
                                " but N=" + std::to_string(n()));
  }
  if (A_) return *A_ * x;
  return P_ * (C_ * x);
}

RVector forward(const MeasurementEnsemble& ensemble, const CVector& x) {
  const CVector ax = ensemble.apply(x);
  return ax.cwiseAbs2();
}

MagnitudeMeasurements add_noise(const RVector& clean, double snr_db, Rng& rng) {
  const double clean_norm = clean.norm();
  if (!(clean_norm > 0.0)) throw std::invalid_argument("add_noise: clean measurement vector is zero");
  if (std::isnan(snr_db)) throw std::invalid_argument("add_noise: snr_db is NaN");

  MagnitudeMeasurements out;
  out.clean = clean;
  if (std::isinf(snr_db) && snr_db > 0.0) {
    out.noise = RVector::Zero(clean.size());
    out.b = clean;
    return out;
  }
  RVector g(clean.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  const double target = clean_norm / std::pow(10.0, snr_db / 20.0);
  out.noise = g * (target / g.norm());
  out.b = clean + out.noise;
  out.snr_db = snr_db;
  return out;
}

void save_ensemble_spec(const EnsembleSpec& spec, const std::filesystem::path& path) {
  json j = {{"format", "cpr-ensemble/1"},
            {"m_tilde", spec.m_tilde},
            {"m", spec.m},
            {"n", spec.n},
            {"phase_kind", to_string(spec.phase_kind)},
            {"cs_kind", to_string(spec.cs_kind)},
            {"seed", spec.seed}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

EnsembleSpec load_ensemble_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read ensemble file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("ensemble file " + path.string() + ": " + e.what());
  }
  EnsembleSpec spec;
  try {
    spec.m_tilde = j.at("m_tilde").get<std::size_t>();
    spec.m = j.at("m").get<std::size_t>();
    spec.n = j.at("n").get<std::size_t>();
    spec.phase_kind = parse_phase_kind(j.at("phase_kind").get<std::string>());
    spec.cs_kind = parse_cs_kind(j.at("cs_kind").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("ensemble file " + path.string() + ": " + e.what());
  }
  return spec;
}

void save_measurements(const RVector& b, const std::filesystem::path& path) {
  json j;
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
}

RVector load_measurements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read measurement file " + path.string());
  try {
    const auto v = json::parse(in).at("b").get<std::vector<double>>();
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const json::exception& e) {
    throw std::invalid_argument("measurement file " + path.string() + ": " + e.what());
  }
}

}  // namespace cpr
