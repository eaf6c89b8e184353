#include "cpr/phaselift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "cpr/kernels.hpp"

namespace cpr {
namespace {

std::span<const cplx> row_view(const CMatrixRowMajor& M, Eigen::Index i) {
  return {M.data() + i * M.cols(), static_cast<std::size_t>(M.cols())};
}

double trace_real(const CMatrix& X) { return X.diagonal().real().sum(); }

// Frobenius inner product Re tr(A^* B).
double frob_inner(const CMatrix& A, const CMatrix& B) {
  return kernels::conj_dot_real({A.data(), static_cast<std::size_t>(A.size())},
                                {B.data(), static_cast<std::size_t>(B.size())});
}

struct Projection {
  CMatrix X;
  Eigen::VectorXd eigenvalues;  // ascending, after clipping
};

// Prox of shift * tr(X) + indicator(X >= 0) at Hermitian V.
Projection project_psd(const CMatrix& V, double shift) {
  const CMatrix H = 0.5 * (V + V.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(H);
  if (eig.info() != Eigen::Success) throw NumericalFailure("phaselift: eigendecomposition failed");
  Eigen::VectorXd d = (eig.eigenvalues().array() - shift).cwiseMax(0.0);
  const auto& U = eig.eigenvectors();
  // Only the positive part contributes.
  Eigen::Index first = 0;
  while (first < d.size() && d[first] == 0.0) ++first;
  Projection out;
  const Eigen::Index k = d.size() - first;
  if (k == 0) {
    out.X = CMatrix::Zero(V.rows(), V.cols());
  } else {
    const auto Uk = U.rightCols(k);
    CMatrix scaled = Uk;
    for (Eigen::Index j = 0; j < k; ++j) scaled.col(j) *= d[first + j];
    out.X = scaled * Uk.adjoint();
    out.X = 0.5 * (out.X + out.X.adjoint()).eval();
  }
  out.eigenvalues = std::move(d);
  return out;
}

}  // namespace

LiftingOperator::LiftingOperator(const CMatrix& P) : P_(P) {}

RVector LiftingOperator::forward(const CMatrix& X) const {
  const CMatrixRowMajor T = P_ * X;
  RVector out(P_.rows());
  for (Eigen::Index i = 0; i < P_.rows(); ++i) out[i] = kernels::conj_dot_real(row_view(P_, i), row_view(T, i));
  return out;
}

CMatrix LiftingOperator::adjoint(const RVector& w) const {
  if (w.size() != P_.rows()) {
    throw std::invalid_argument("lifted_adjoint: length(w)=" + std::to_string(w.size()) +
                                " but P has " + std::to_string(P_.rows()) + " rows");
  }
  CMatrixRowMajor W = P_;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    kernels::scale({W.data() + i * W.cols(), static_cast<std::size_t>(W.cols())}, w[i]);
  }
  CMatrix M = P_.adjoint() * W;
  return 0.5 * (M + M.adjoint());
}

RVector lifted_forward(const CMatrix& P, const CMatrix& X) {
  if (X.rows() != P.cols() || X.cols() != P.cols()) {
    throw std::invalid_argument("lifted_forward: X must be " + std::to_string(P.cols()) + "x" +
                                std::to_string(P.cols()));
  }
  const double scale = std::max(1.0, X.norm());
  if ((X - X.adjoint()).norm() > 1e-10 * scale) throw std::invalid_argument("lifted_forward: X is not Hermitian");
  return LiftingOperator(P).forward(X);
}

CMatrix lifted_adjoint(const CMatrix& P, const RVector& w) { return LiftingOperator(P).adjoint(w); }

LiftedSolution solve_phaselift(const CMatrix& P, const RVector& b_in, const PhaseLiftOptions& opts) {
  if (b_in.size() != P.rows()) {
    throw std::invalid_argument("solve_phaselift: length(b)=" + std::to_string(b_in.size()) + " but P has " +
                                std::to_string(P.rows()) + " rows");
  }
  const Eigen::Index m = P.cols();
  const RVector b = b_in.cwiseMax(0.0);
  const LiftingOperator op(P);

  LiftedSolution sol;
  sol.X = CMatrix::Zero(m, m);
  sol.top_eigenvector = CVector::Zero(m);
  if (m > 0) sol.top_eigenvector[0] = 1.0;
  sol.y_hat = CVector::Zero(m);

  if (b.isZero(0.0)) {
    sol.converged = true;
    return sol;
  }

  // Lipschitz constant of X -> A^*(A(X)); identity is close to the top mode.
  CMatrix V = CMatrix::Identity(m, m) / std::sqrt(static_cast<double>(m));
  double lipschitz = 0.0;
  for (int k = 0; k < std::max(1, opts.power_iters); ++k) {
    const CMatrix W = op.adjoint(op.forward(V));
    lipschitz = frob_inner(V, W);
    V = W / W.norm();
  }
  const CMatrix Atb = op.adjoint(b);
  const double lambda = opts.lambda ? *opts.lambda
                                    : opts.lambda_scale * Eigen::SelfAdjointEigenSolver<CMatrix>(Atb, Eigen::EigenvaluesOnly)
                                                              .eigenvalues()
                                                              .maxCoeff();
  const double step = opts.step_fraction / lipschitz;
  sol.lambda = lambda;
  sol.step = step;

  auto objective = [&](const RVector& ax, const CMatrix& X) {
    return 0.5 * (ax - b).squaredNorm() + lambda * trace_real(X);
  };

  CMatrix X = sol.X;
  RVector AX = RVector::Zero(b.size());
  double f = objective(AX, X);
  CMatrix Z = X;
  RVector AZ = AX;
  double t = 1.0;
  Eigen::VectorXd eigenvalues = Eigen::VectorXd::Zero(m);
  if (opts.record_objective) sol.objective_trace.push_back(f);

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    const CMatrix G = op.adjoint(AZ - b);
    Projection proj = project_psd(Z - step * G, step * lambda);
    if (!proj.X.allFinite()) throw NumericalFailure("phaselift: non-finite iterate at iteration " + std::to_string(iter));
    RVector AXn = op.forward(proj.X);
    const double fn = objective(AXn, proj.X);

    if (fn > f) {
      const bool plain_step = (t == 1.0);
      if (!plain_step) {
        // Momentum overshot: restart from the last accepted iterate.
        ++sol.restarts;
        t = 1.0;
        Z = X;
        AZ = AX;
        continue;
      }
      // A plain gradient step no longer decreases: at the rounding floor.
      if (fn > f + 1e-12 * std::max(1.0, std::abs(f))) {
        sol.converged = true;
        break;
      }
    }

    const double dX = (proj.X - X).norm();
    const double xnorm = std::max(proj.X.norm(), 1e-300);
    const double df = std::abs(f - fn) / std::max(std::abs(f), 1e-300);

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / tn;
    Z = proj.X + beta * (proj.X - X);
    AZ = AXn + beta * (AXn - AX);
    t = tn;
    X = std::move(proj.X);
    AX = std::move(AXn);
    eigenvalues = std::move(proj.eigenvalues);
    f = fn;
    if (opts.record_objective) sol.objective_trace.push_back(f);

    if (df < opts.tol || dX / xnorm < opts.tol) {
      sol.converged = true;
      ++iter;
      break;
    }
  }

  sol.iterations = iter;
  sol.objective = f;
  sol.residual = (AX - b).norm();
  sol.X = X;

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(X);
  if (eig.info() != Eigen::Success) throw NumericalFailure("phaselift: final eigendecomposition failed");
  const auto& d = eig.eigenvalues();
  sol.top_eigenvalue = std::max(d[m - 1], 0.0);
  sol.second_eigenvalue = m > 1 ? d[m - 2] : 0.0;
  sol.min_eigenvalue = d[0];
  sol.top_eigenvector = eig.eigenvectors().col(m - 1);
  sol.y_hat = std::sqrt(sol.top_eigenvalue) * sol.top_eigenvector;
  return sol;
}

double estimate_stage1_noise(const LiftedSolution& solution, std::size_t m_tilde, const PhaseLiftOptions& opts) {
  constexpr double kEps = 1e-12;
  if (m_tilde == 0) return opts.eta_floor;
  const double scale = std::max(solution.y_hat.norm(), kEps);
  const double eta = opts.kappa * solution.residual / std::sqrt(static_cast<double>(m_tilde)) / scale;
  return std::max(opts.eta_floor, eta);
}

}  // namespace cpr
