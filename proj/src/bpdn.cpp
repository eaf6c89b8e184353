#include "cpr/bpdn.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cpr/kernels.hpp"

namespace cpr {
namespace {

// Projection onto {w : ||w - center|| <= radius}.
CVector project_ball(const CVector& w, const CVector& center, double radius) {
  const CVector d = w - center;
  const double nd = d.norm();
  if (nd <= radius) return w;
  return center + (radius / nd) * d;
}

}  // namespace

CVector soft_threshold_complex(const CVector& z, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("soft_threshold_complex: kappa must be nonnegative");
  CVector out(z.size());
  kernels::soft_threshold(kernels::view(z), kappa, kernels::view(out));
  return out;
}

namespace {

// Dual objective Re<lam, y> - eta ||lam|| after scaling lam into
// {||C^* lam||_inf <= 1}; a lower bound on the optimal l1 norm.
double dual_value(const CMatrix& C, const CVector& y, double eta, CVector lam) {
  const double inf = (C.adjoint() * lam).cwiseAbs().maxCoeff();
  if (!(inf > 0.0)) return 0.0;
  if (inf > 1.0) lam /= inf;
  return lam.dot(y).real() - eta * lam.norm();
}

// Moves z onto the ball ||C z - y|| <= eta along the minimum-norm direction.
CVector polish_onto_ball(const CMatrix& C, const Eigen::LDLT<CMatrix>& gram, const CVector& y, double eta,
                         const CVector& z) {
  const CVector r = y - C * z;
  const double nr = r.norm();
  if (nr <= eta) return z;
  return z + C.adjoint() * gram.solve(r * (1.0 - eta / nr));
}

struct Candidate {
  CVector z;
  CVector lam;
};

// Exact solution restricted to the support and phases of `u`. On a fixed
// support with sign pattern sigma the KKT system reduces to
//   z_S = G^{-1}(C_S^* y - t sigma),  G = C_S^* C_S,
// with t >= 0 chosen so that ||y - C_S z_S|| = eta; the matching dual point is
// (y - C z) / t, or the minimum-norm C_S^{-*} sigma when t = 0.
std::optional<Candidate> refine_on_support(const CMatrix& C, const CVector& y, double eta, const CVector& u) {
  std::vector<Eigen::Index> S;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    if (u[k] != cplx(0.0, 0.0)) S.push_back(k);
  }
  const auto k = static_cast<Eigen::Index>(S.size());
  if (k == 0 || k > C.rows()) return std::nullopt;
  CMatrix CS(C.rows(), k);
  CVector sigma(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    CS.col(j) = C.col(S[j]);
    sigma[j] = u[S[j]] / std::abs(u[S[j]]);
  }
  const Eigen::LLT<CMatrix> G(CS.adjoint() * CS);
  if (G.info() != Eigen::Success) return std::nullopt;
  const CVector z_ls = G.solve(CS.adjoint() * y);
  const double r0 = (y - CS * z_ls).norm();
  // y has unit norm here, so 1e-12 is rounding slack for eta = 0.
  if (r0 > eta + 1e-12) return std::nullopt;

  CVector zS, a;
  double t = 0.0;
  for (int pass = 0; pass < 8; ++pass) {
    const CVector g = G.solve(sigma);
    a = CS * g;
    const double na = a.norm();
    t = (eta > r0 && na > 0.0) ? std::sqrt(eta * eta - r0 * r0) / na : 0.0;
    zS = z_ls - t * g;
    CVector next(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double mag = std::abs(zS[j]);
      if (!(mag > 0.0)) return std::nullopt;
      next[j] = zS[j] / mag;
    }
    const double change = (next - sigma).cwiseAbs().maxCoeff();
    sigma = next;
    if (change <= 1e-13) break;
  }

  Candidate out;
  out.z = CVector::Zero(C.cols());
  for (Eigen::Index j = 0; j < k; ++j) out.z[S[j]] = zS[j];
  out.lam = t > 0.0 ? CVector((y - C * out.z) / t) : a;
  return out;
}

struct Certificate {
  CVector z;
  double gap = 0.0;
};

// Best feasible primal point among the refined and polished iterates, checked
// against the best available dual point. Succeeds when the gap is below tol
// relative to the l1 norm.
std::optional<Certificate> certify(const CMatrix& C, const Eigen::LDLT<CMatrix>& gram, const CVector& y, double eta,
                                   const CVector& u, const CVector& lam_admm, double tol) {
  const double slack = eta * 1e-7 + 1e-14 * y.norm();
  Certificate best;
  double primal = std::numeric_limits<double>::infinity();
  double dual = dual_value(C, y, eta, lam_admm);
  auto offer = [&](const CVector& z) {
    if ((C * z - y).norm() > eta + slack) return;
    const double p = kernels::l1_norm(kernels::view(z));
    if (p < primal) {
      primal = p;
      best.z = z;
    }
  };
  if (auto refined = refine_on_support(C, y, eta, u)) {
    offer(refined->z);
    dual = std::max(dual, dual_value(C, y, eta, refined->lam));
  }
  offer(polish_onto_ball(C, gram, y, eta, u));
  if (!std::isfinite(primal)) return std::nullopt;
  best.gap = primal - dual;
  if (!(best.gap <= tol * primal)) return std::nullopt;
  return best;
}

}  // namespace

BpdnSolution solve_bpdn(const CMatrix& C, const CVector& y, double eta, const BpdnOptions& opts) {
  if (y.size() != C.rows()) {
    throw std::invalid_argument("solve_bpdn: length(y)=" + std::to_string(y.size()) + " but C has " +
                                std::to_string(C.rows()) + " rows");
  }
  if (!(eta >= 0.0)) throw std::invalid_argument("solve_bpdn: eta must be nonnegative");

  const Eigen::Index m = C.rows();
  const Eigen::Index n = C.cols();
  BpdnSolution sol;
  sol.rho = opts.rho;

  if (y.norm() <= eta) {
    // Zero is feasible and has the least possible l1 norm.
    sol.z_hat = CVector::Zero(n);
    sol.constraint_residual = y.norm();
    sol.converged = true;
    return sol;
  }

  // Work on the equivalent problem with ||C||_2 = 1 and ||y||_2 = 1: the
  // minimizer is invariant to scaling C, y and eta together, and scales
  // linearly with (y, eta).
  const CMatrix gram = C * C.adjoint();
  const double cnorm = std::sqrt(Eigen::SelfAdjointEigenSolver<CMatrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff());
  if (!(cnorm > 0.0)) throw std::invalid_argument("solve_bpdn: C is zero");
  const CMatrix Cs = C / cnorm;
  const double yscale = y.norm() / cnorm;
  const CVector ys = y / (cnorm * yscale);
  const double etas = eta / (cnorm * yscale);
  const CMatrix CCt = gram / (cnorm * cnorm);
  const Eigen::LLT<CMatrix> coupling(CMatrix::Identity(m, m) + CCt);
  if (coupling.info() != Eigen::Success) throw NumericalFailure("solve_bpdn: factorization of I + CC* failed");
  const Eigen::LDLT<CMatrix> gram_s(CCt);

  CVector u = CVector::Zero(n), d1 = CVector::Zero(n), z(n), uz(n);
  CVector v = CVector::Zero(m), d2 = CVector::Zero(m);
  // The useful penalty scales like ||y|| / eta; opts.rho multiplies that.
  double rho = opts.scale_rho ? opts.rho / std::max(etas, 1e-3) : opts.rho;

  const double sqrt_p = std::sqrt(static_cast<double>(n + m));
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    // z = (I + C^*C)^{-1} (a + C^* c) with a = u - d1, c = v - d2, via Woodbury:
    // with r = a + C^*c, C r = C a + CC^* c and z = r - C^*(I + CC^*)^{-1} C r
    // = a + C^*(c - K C r).
    const CVector a = u - d1;
    const CVector c = v - d2;
    const CVector Cr = Cs * a + CCt * c;
    const CVector KCr = coupling.solve(Cr);
    z = a + Cs.adjoint() * (c - KCr);
    const CVector Cz = Cr - CCt * KCr;

    const CVector u_old = u;
    const CVector v_old = v;
    // Over-relaxed coupling point.
    const double alpha = opts.relaxation;
    const CVector zr = alpha * z + (1.0 - alpha) * u_old;
    const CVector Czr = alpha * Cz + (1.0 - alpha) * v_old;
    uz = zr + d1;
    kernels::soft_threshold(kernels::view(uz), 1.0 / rho, kernels::view(u));
    v = project_ball(Czr + d2, ys, etas);

    d1 += zr - u;
    d2 += Czr - v;
    const CVector rz = z - u;
    const CVector rv = Cz - v;

    if (!d1.allFinite() || !d2.allFinite() || !z.allFinite()) {
      throw NumericalFailure("solve_bpdn: non-finite iterate at iteration " + std::to_string(iter));
    }

    const double primal = std::sqrt(rz.squaredNorm() + rv.squaredNorm());
    const double dual = rho * ((u - u_old) + Cs.adjoint() * (v - v_old)).norm();
    const double scale_pri = std::max(std::sqrt(z.squaredNorm() + Cz.squaredNorm()),
                                      std::sqrt(u.squaredNorm() + v.squaredNorm()));
    // d1 + C^* d2 vanishes at the optimum, so scale by the blocks separately.
    const double scale_dual = rho * std::max(d1.norm(), (Cs.adjoint() * d2).norm());
    sol.primal_residual = primal;
    sol.dual_residual = dual;

    // Absolute plus relative tolerances; on the normalized problem the
    // absolute part is itself relative to ||y||.
    if (primal <= opts.tol * (sqrt_p + scale_pri) && dual <= opts.tol * (sqrt_n + scale_dual)) {
      sol.converged = true;
      ++iter;
      break;
    }

    if (opts.certify_every > 0 && (iter + 1) % opts.certify_every == 0) {
      if (auto cert = certify(Cs, gram_s, ys, etas, u, -rho * d2, opts.tol)) {
        u = cert->z;
        sol.converged = true;
        sol.certified = true;
        ++iter;
        break;
      }
    }
    // Rebalancing every iteration can cycle; adapt periodically during warm-up only.
    if (opts.adaptive && iter < opts.adapt_until && (iter + 1) % opts.adapt_every == 0) {
      if (primal > opts.balance_ratio * dual) {
        rho *= opts.rho_factor;
        d1 /= opts.rho_factor;
        d2 /= opts.rho_factor;
      } else if (dual > opts.balance_ratio * primal) {
        rho /= opts.rho_factor;
        d1 *= opts.rho_factor;
        d2 *= opts.rho_factor;
      }
    }
  }

  if (!sol.converged && opts.certify_every > 0) {
    if (auto cert = certify(Cs, gram_s, ys, etas, u, -rho * d2, opts.tol)) {
      u = cert->z;
      sol.converged = true;
      sol.certified = true;
    }
  }
  if (opts.polish && !sol.certified) u = polish_onto_ball(Cs, gram_s, ys, etas, u);

  sol.iterations = iter;
  sol.rho = rho;
  sol.z_hat = u * yscale;

  sol.constraint_residual = (C * sol.z_hat - y).norm();
  sol.l1_norm = kernels::l1_norm(kernels::view(sol.z_hat));
  return sol;
}

}  // namespace cpr
