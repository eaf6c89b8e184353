#pragma once

#include <optional>
#include <vector>

#include "cpr/types.hpp"

namespace cpr {

// Lifting map X -> (p_i^* X p_i)_i for the rows of P, and its adjoint
// w -> sum_i w_i p_i p_i^*. Row i of P holds conj(p_i), so (P y)_i = <p_i, y>.
class LiftingOperator {
 public:
  explicit LiftingOperator(const CMatrix& P);

  RVector forward(const CMatrix& X) const;
  CMatrix adjoint(const RVector& w) const;

  std::size_t rows() const { return static_cast<std::size_t>(P_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(P_.cols()); }

 private:
  CMatrixRowMajor P_;
};

// Checked free-function forms. lifted_forward rejects non-Hermitian X.
RVector lifted_forward(const CMatrix& P, const CMatrix& X);
CMatrix lifted_adjoint(const CMatrix& P, const RVector& w);

struct PhaseLiftOptions {
  int max_iters = 5000;
  double tol = 1e-9;
  // Trace weight; when unset, lambda_scale * lambda_max(A^*(b)).
  std::optional<double> lambda;
  double lambda_scale = 1e-8;
  int power_iters = 20;
  double step_fraction = 0.9;  // step = step_fraction / L
  // Used by estimate_stage1_noise.
  double eta_floor = 1e-8;
  double kappa = 2.0;
  bool record_objective = false;
};

struct LiftedSolution {
  CMatrix X;
  double top_eigenvalue = 0.0;
  double second_eigenvalue = 0.0;
  double min_eigenvalue = 0.0;
  CVector top_eigenvector;
  CVector y_hat;
  double residual = 0.0;  // ||A(X) - b||_2 against the clipped b
  double objective = 0.0;
  double lambda = 0.0;
  double step = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // accepted iterates, when requested
};

// min_{X >= 0} 1/2 ||A(X) - b||^2 + lambda tr(X) by FISTA with a PSD
// eigenvalue-clipping prox and monotone restart. Negative b entries are
// clipped to zero first. Throws NumericalFailure on non-finite iterates.
LiftedSolution solve_phaselift(const CMatrix& P, const RVector& b, const PhaseLiftOptions& opts = {});

// Heuristic stage-2 noise level:
//   max(eta_floor, kappa * residual / sqrt(m_tilde) / max(||y_hat||, eps))
double estimate_stage1_noise(const LiftedSolution& solution, std::size_t m_tilde, const PhaseLiftOptions& opts = {});

}  // namespace cpr
