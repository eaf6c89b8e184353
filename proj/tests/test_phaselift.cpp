#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cpr/ensembles.hpp"
#include "cpr/phaselift.hpp"
#include "cpr/signals.hpp"
#include "test_util.hpp"

namespace cpr {
namespace {

using testing::random_cmatrix;
using testing::random_cvector;
using testing::random_hermitian;

TEST(Lifting, MatchesTripleSum) {
  Rng rng(1);
  const CMatrix P = random_cmatrix(4, 3, rng);
  const CMatrix X = random_hermitian(3, rng);
  const RVector got = lifted_forward(P, X);
  for (Eigen::Index i = 0; i < 4; ++i) {
    // Row i holds conj(p_i): p_i^* X p_i = sum_jk P_ij X_jk conj(P_ik).
    cplx acc = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index k = 0; k < 3; ++k) acc += P(i, j) * X(j, k) * std::conj(P(i, k));
    EXPECT_NEAR(got[i], acc.real(), 1e-12);
    EXPECT_NEAR(acc.imag(), 0.0, 1e-12);
  }
}

TEST(Lifting, RankOneMatchesMagnitudes) {
  Rng rng(2);
  const CMatrix P = random_cmatrix(7, 4, rng);
  const CVector y = random_cvector(4, rng);
  const RVector got = lifted_forward(P, y * y.adjoint());
  EXPECT_LT((got - (P * y).cwiseAbs2()).norm(), 1e-12);
}

TEST(Lifting, IdentityGivesRowNorms) {
  Rng rng(3);
  const CMatrix P = gen_phase_matrix(6, 5, PhaseKind::kSphereUniform, rng);
  const RVector got = lifted_forward(P, CMatrix::Identity(5, 5));
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(got[i], 5.0, 1e-12);
}

TEST(Lifting, AdjointIdentity) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix P = random_cmatrix(5, 3, rng);
    const CMatrix X = random_hermitian(3, rng);
    RVector w(5);
    for (Eigen::Index i = 0; i < 5; ++i) w[i] = rng.normal();
    const double lhs = lifted_forward(P, X).dot(w);
    const CMatrix M = lifted_adjoint(P, w);
    const double rhs = (X.adjoint() * M).trace().real();
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
    EXPECT_LT((M - M.adjoint()).norm(), 1e-14);
  }
}

TEST(Lifting, AdjointBasisAndZero) {
  Rng rng(5);
  const CMatrix P = random_cmatrix(3, 2, rng);
  RVector e = RVector::Zero(3);
  e[0] = 1.0;
  const CVector p0 = P.row(0).adjoint();
  EXPECT_LT((lifted_adjoint(P, e) - p0 * p0.adjoint()).norm(), 1e-14);
  EXPECT_EQ(lifted_adjoint(P, RVector::Zero(3)).norm(), 0.0);
  EXPECT_THROW(lifted_adjoint(P, RVector::Zero(2)), std::invalid_argument);
}

TEST(Lifting, RejectsNonHermitian) {
  Rng rng(6);
  const CMatrix P = random_cmatrix(3, 3, rng);
  EXPECT_THROW(lifted_forward(P, random_cmatrix(3, 3, rng)), std::invalid_argument);
  EXPECT_THROW(lifted_forward(P, CMatrix::Identity(2, 2)), std::invalid_argument);
}

struct Instance {
  CMatrix P;
  CVector y;
  RVector b;
};

Instance noiseless_instance(std::size_t m, std::size_t m_tilde, std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.P = gen_phase_matrix(m_tilde, m, PhaseKind::kComplexGaussian, rng);
  in.y = random_cvector(static_cast<Eigen::Index>(m), rng);
  in.b = (in.P * in.y).cwiseAbs2();
  return in;
}

TEST(PhaseLift, RecoversNoiseless) {
  const Instance in = noiseless_instance(8, 64, 7);
  const LiftedSolution sol = solve_phaselift(in.P, in.b);
  EXPECT_TRUE(sol.converged);
  const ErrorReport rep = align_phase(in.y, sol.y_hat);
  ASSERT_TRUE(rep.relative_l2);
  EXPECT_LT(*rep.relative_l2, 1e-4);
  // Rank-one concentration and PSD output.
  EXPECT_LT(sol.second_eigenvalue / sol.top_eigenvalue, 1e-3);
  EXPECT_GE(sol.min_eigenvalue, -1e-8);
}

TEST(PhaseLift, ZeroMeasurementsGiveZero) {
  Rng rng(8);
  const CMatrix P = random_cmatrix(10, 3, rng);
  const LiftedSolution sol = solve_phaselift(P, RVector::Zero(10));
  EXPECT_EQ(sol.X.norm(), 0.0);
  EXPECT_EQ(sol.y_hat.norm(), 0.0);
  EXPECT_TRUE(sol.converged);
}

TEST(PhaseLift, ScalarClosedForm) {
  // m = 1: minimize 1/2 sum (|p_i|^2 t - b_i)^2 + lambda t over t >= 0.
  Rng rng(9);
  const CMatrix P = random_cmatrix(12, 1, rng);
  const RVector a = P.col(0).cwiseAbs2();
  const double t_true = 2.5;
  const RVector b = a * t_true;
  PhaseLiftOptions opts;
  opts.lambda = 0.3;
  opts.tol = 1e-14;
  const LiftedSolution sol = solve_phaselift(P, b, opts);
  const double t_star = std::max(0.0, (a.dot(b) - 0.3) / a.squaredNorm());
  EXPECT_NEAR(sol.top_eigenvalue, t_star, 1e-9 * t_star);
  EXPECT_NEAR(std::abs(sol.y_hat[0]), std::sqrt(t_star), 1e-9);
}

TEST(PhaseLift, ObjectiveIsMonotone) {
  const Instance in = noiseless_instance(6, 40, 10);
  PhaseLiftOptions opts;
  opts.record_objective = true;
  const LiftedSolution sol = solve_phaselift(in.P, in.b, opts);
  ASSERT_GT(sol.objective_trace.size(), 2u);
  for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
    const double prev = sol.objective_trace[k - 1];
    EXPECT_LE(sol.objective_trace[k], prev + 1e-12 * std::max(1.0, std::abs(prev))) << "iteration " << k;
  }
}

TEST(PhaseLift, PhaseCovariance) {
  const Instance in = noiseless_instance(6, 48, 11);
  const CVector rotated = std::polar(1.0, 1.3) * in.y;
  const RVector b_rot = (in.P * rotated).cwiseAbs2();
  const LiftedSolution a = solve_phaselift(in.P, in.b);
  const LiftedSolution b = solve_phaselift(in.P, b_rot);
  EXPECT_LT(align_phase(a.y_hat, b.y_hat).aligned_l2, 1e-6 * in.y.norm());
}

TEST(PhaseLift, ClipsNegativeMeasurements) {
  const Instance in = noiseless_instance(4, 30, 12);
  RVector b = in.b;
  b[0] = -1e-3;
  RVector clipped = b;
  clipped[0] = 0.0;
  const LiftedSolution a = solve_phaselift(in.P, b);
  const LiftedSolution c = solve_phaselift(in.P, clipped);
  EXPECT_EQ(a.X, c.X);
}

TEST(PhaseLift, LengthMismatchThrows) {
  Rng rng(13);
  EXPECT_THROW(solve_phaselift(random_cmatrix(5, 2, rng), RVector::Ones(4)), std::invalid_argument);
}

TEST(PhaseLift, Deterministic) {
  const Instance in = noiseless_instance(5, 30, 14);
  EXPECT_EQ(solve_phaselift(in.P, in.b).X, solve_phaselift(in.P, in.b).X);
}

TEST(NoiseEstimate, FormulaAndFloor) {
  LiftedSolution sol;
  sol.y_hat = CVector::Ones(4);  // norm 2
  sol.residual = 0.0;
  PhaseLiftOptions opts;
  EXPECT_EQ(estimate_stage1_noise(sol, 16, opts), opts.eta_floor);
  sol.residual = 1.0;
  const double eta = estimate_stage1_noise(sol, 16, opts);
  EXPECT_DOUBLE_EQ(eta, 2.0 * 1.0 / 4.0 / 2.0);
  opts.kappa = 4.0;
  EXPECT_DOUBLE_EQ(estimate_stage1_noise(sol, 16, opts), 2.0 * eta);
}

TEST(NoiseEstimate, NoiselessRunHitsFloorScale) {
  const Instance in = noiseless_instance(8, 64, 15);
  const LiftedSolution sol = solve_phaselift(in.P, in.b);
  EXPECT_LE(estimate_stage1_noise(sol, 64), 1e-4 * sol.y_hat.norm());
}

}  // namespace
}  // namespace cpr
