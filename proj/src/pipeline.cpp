#include "cpr/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/QR>

namespace cpr {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

bool debias(const CMatrix& C, const CVector& y, double threshold, CVector& z) {
  if (z.size() == 0) return false;
  const double peak = z.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return false;
  std::vector<Eigen::Index> S;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (std::abs(z[k]) > threshold * peak) S.push_back(k);
  }
  // A refit needs more equations than unknowns to stay overdetermined.
  if (static_cast<Eigen::Index>(S.size()) >= C.rows()) return false;
  CMatrix CS(C.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) CS.col(static_cast<Eigen::Index>(j)) = C.col(S[j]);
  const Eigen::ColPivHouseholderQR<CMatrix> qr(CS);
  if (qr.rank() < CS.cols()) return false;
  const CVector zS = qr.solve(y);
  z.setZero();
  for (std::size_t j = 0; j < S.size(); ++j) z[S[j]] = zS[static_cast<Eigen::Index>(j)];
  return true;
}

std::string_view to_string(EtaSource s) {
  switch (s) {
    case EtaSource::kExplicit: return "explicit";
    case EtaSource::kOracle: return "oracle";
    case EtaSource::kEstimated: return "estimated";
  }
  return "?";
}

RecoveryResult recover(const MeasurementEnsemble& ensemble, const RVector& b, const RecoveryOptions& opts,
                       const GroundTruth* truth) {
  if (static_cast<std::size_t>(b.size()) != ensemble.m_tilde()) {
    throw std::invalid_argument("recover: length(b)=" + std::to_string(b.size()) +
                                " but ensemble has m_tilde=" + std::to_string(ensemble.m_tilde()));
  }
  if (truth != nullptr && static_cast<std::size_t>(truth->x.size()) != ensemble.n()) {
    throw std::invalid_argument("recover: ground truth length differs from N");
  }

  RecoveryResult res;
  const auto t_total = Clock::now();

  auto t0 = Clock::now();
  const LiftedSolution lifted = solve_phaselift(ensemble.P(), b, opts.phaselift);
  res.stage1.seconds = seconds_since(t0);
  res.stage1.residual = lifted.residual;
  res.stage1.iterations = lifted.iterations;
  res.stage1.converged = lifted.converged;
  res.stage1_top_eigenvalue = lifted.top_eigenvalue;
  res.stage1_second_eigenvalue = lifted.second_eigenvalue;
  res.y_hat = lifted.y_hat;

  if (opts.eta) {
    res.eta_used = *opts.eta;
    res.eta_source = EtaSource::kExplicit;
  } else if (opts.oracle_eta && truth != nullptr) {
    const CVector cx = ensemble.C() * truth->x;
    res.eta_used = std::max(align_phase(cx, lifted.y_hat).aligned_l2, opts.phaselift.eta_floor);
    res.eta_source = EtaSource::kOracle;
  } else {
    res.eta_used = estimate_stage1_noise(lifted, ensemble.m_tilde(), opts.phaselift);
    res.eta_source = EtaSource::kEstimated;
  }

  t0 = Clock::now();
  const BpdnSolution sparse = solve_bpdn(ensemble.C(), lifted.y_hat, res.eta_used, opts.bpdn);
  res.stage2.seconds = seconds_since(t0);
  res.stage2.residual = sparse.constraint_residual;
  res.stage2.iterations = sparse.iterations;
  res.stage2.converged = sparse.converged;
  res.x_hat = sparse.z_hat;
  if (opts.debias) res.debiased = debias(ensemble.C(), lifted.y_hat, opts.debias_threshold, res.x_hat);

  if (truth != nullptr) {
    res.error = align_phase(truth->x, res.x_hat);
    if (res.error->relative_l2) res.success = *res.error->relative_l2 < opts.success_threshold;
  }
  res.total_seconds = seconds_since(t_total);
  return res;
}

CprBoundReport check_cpr_error_bound(const RecoveryResult& result, const CVector& x, std::size_t s,
                                     const RVector& noise, const MeasurementEnsemble& ensemble,
                                     std::optional<double> floor, double success_threshold) {
  if (s == 0) throw std::invalid_argument("check_cpr_error_bound: s must be positive");
  CprBoundReport rep;
  rep.compressibility_term = best_s_term_error(x, s, Norm::kL1) / std::sqrt(static_cast<double>(s));
  const double cx = (ensemble.C() * x).norm();
  const double n1 = noise.lpNorm<1>();
  rep.noise_term = (n1 > 0.0 && cx > 0.0) ? n1 / (static_cast<double>(ensemble.m_tilde()) * cx) : 0.0;
  rep.aligned_error = align_phase(x, result.x_hat).aligned_l2;
  rep.floor = floor ? *floor : success_threshold * x.norm();
  rep.exact_recovery_regime = rep.compressibility_term == 0.0 && rep.noise_term == 0.0;
  const double denom = rep.compressibility_term + rep.noise_term + rep.floor;
  rep.ratio = denom > 0.0 ? rep.aligned_error / denom : 0.0;
  return rep;
}

}  // namespace cpr
