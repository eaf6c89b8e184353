#pragma once

#include "cpr/types.hpp"

namespace cpr {

struct BpdnOptions {
  double tol = 1e-8;
  int max_iters = 10000;
  double rho = 1.0;
  // Start from rho * ||y|| / max(eta, 1e-3 ||y||) instead of rho itself.
  bool scale_rho = true;
  bool adaptive = true;
  // Residual balancing: rescale rho by `rho_factor` when one residual
  // exceeds the other by `balance_ratio`.
  double rho_factor = 2.0;
  double balance_ratio = 10.0;
  // Over-relaxation in (0, 2); 1 is plain ADMM.
  double relaxation = 1.0;
  int adapt_every = 10;
  int adapt_until = 2000;
  // Move the final iterate onto the constraint ball along the minimum-norm
  // direction so the returned point is feasible to rounding.
  bool polish = true;
  // Every `certify_every` iterations, solve exactly on the current support and
  // stop if the duality gap is below tol relative (0 disables).
  int certify_every = 10;
};

struct BpdnSolution {
  CVector z_hat;
  double l1_norm = 0.0;
  double constraint_residual = 0.0;  // ||C z_hat - y||_2
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
  bool certified = false;  // stopped on a duality-gap certificate
};

// Entrywise complex soft threshold: the prox of kappa ||.||_1.
CVector soft_threshold_complex(const CVector& z, double kappa);

// min ||z||_1 subject to ||C z - y||_2 <= eta by three-block ADMM
// (l1 prox, residual-ball projection, least-squares coupling through a cached
// factorization of I + C C^*). Throws NumericalFailure on non-finite iterates.
BpdnSolution solve_bpdn(const CMatrix& C, const CVector& y, double eta, const BpdnOptions& opts = {});

}  // namespace cpr
