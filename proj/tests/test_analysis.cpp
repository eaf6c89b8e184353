#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cpr/analysis.hpp"
#include "cpr/ensembles.hpp"
#include "test_util.hpp"

namespace cpr {
namespace {

using testing::random_cvector;
using testing::random_real_matrix;

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(12, 2), 66u);
  EXPECT_EQ(binomial(64, 10), 151473214816u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(200, 100), std::numeric_limits<std::uint64_t>::max());
}

// Independent deviation via the eigenvalues of the Gram matrix C_T^* C_T.
double gram_deviation(const CMatrix& C, const std::vector<Eigen::Index>& T) {
  CMatrix sub(C.rows(), static_cast<Eigen::Index>(T.size()));
  for (std::size_t j = 0; j < T.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = C.col(T[j]);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<CMatrix>(sub.adjoint() * sub).eigenvalues();
  return std::max(ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff());
}

TEST(Ric, MatchesGramEigenvalues) {
  Rng rng(1);
  const CMatrix C = random_real_matrix(6, 10, rng, 1.0 / std::sqrt(6.0));
  for (std::size_t s : {1u, 2u}) {
    const RicReport rep = brute_force_ric(C, s);
    EXPECT_EQ(rep.order, 2 * s);
    EXPECT_EQ(rep.enumerated_supports, binomial(10, 2 * s));
    double oracle = -std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << 10); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != 2 * s) continue;
      std::vector<Eigen::Index> T;
      for (Eigen::Index k = 0; k < 10; ++k)
        if (mask & (1u << k)) T.push_back(k);
      oracle = std::max(oracle, gram_deviation(C, T));
    }
    EXPECT_NEAR(rep.delta, oracle, 1e-10) << "s=" << s;
    std::vector<Eigen::Index> worst(rep.worst_support.begin(), rep.worst_support.end());
    EXPECT_NEAR(gram_deviation(C, worst), rep.delta, 1e-10);
  }
}

TEST(Ric, DuplicatedColumnGivesOne) {
  CMatrix C = CMatrix::Zero(4, 5);
  C(0, 0) = 1.0;
  C(0, 1) = 1.0;
  C(1, 2) = 1.0;
  C(2, 3) = 1.0;
  C(3, 4) = 1.0;
  const RicReport rep = brute_force_ric(C, 1);
  EXPECT_DOUBLE_EQ(rep.delta, 1.0);
  EXPECT_EQ(rep.worst_support, (std::vector<std::size_t>{0, 1}));
}

TEST(Ric, ProbesNeverExceedExact) {
  Rng rng(2);
  const CMatrix C = random_real_matrix(8, 12, rng, 1.0 / std::sqrt(8.0));
  const double delta = brute_force_ric(C, 1).delta;
  double probe_max = 0.0;
  for (int p = 0; p < 10000; ++p) {
    const std::size_t i = rng.index(12);
    std::size_t j = rng.index(11);
    if (j >= i) ++j;
    CVector x = CVector::Zero(12);
    x[static_cast<Eigen::Index>(i)] = rng.complex_normal();
    x[static_cast<Eigen::Index>(j)] = rng.complex_normal();
    x /= x.norm();
    probe_max = std::max(probe_max, std::abs((C * x).squaredNorm() - 1.0));
  }
  EXPECT_LE(probe_max, delta + 1e-12);
  EXPECT_GT(probe_max, 0.5 * delta);
}

TEST(Ric, MonotoneInOrder) {
  Rng rng(3);
  const CMatrix C = random_real_matrix(8, 10, rng, 1.0 / std::sqrt(8.0));
  EXPECT_LE(brute_force_ric(C, 1).delta, brute_force_ric(C, 2).delta);
  EXPECT_LE(brute_force_ric(C, 2).delta, brute_force_ric(C, 3).delta);
}

TEST(Ric, ThreadCountDoesNotMatter) {
  Rng rng(4);
  const CMatrix C = random_real_matrix(6, 12, rng, 1.0 / std::sqrt(6.0));
  const RicReport a = brute_force_ric(C, 2, 1);
  const RicReport b = brute_force_ric(C, 2, 3);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(a.worst_support, b.worst_support);
}

TEST(Ric, OrthonormalIsIsometry) {
  Rng rng(5);
  const CMatrix Q = testing::random_cmatrix(8, 8, rng).householderQr().householderQ();
  EXPECT_LT(brute_force_ric(Q, 2).delta, 1e-13);
}

TEST(Ric, RefusesLargeEnumeration) {
  Rng rng(6);
  const CMatrix C = random_real_matrix(20, 64, rng);
  EXPECT_THROW(brute_force_ric(C, 5), EnumerationTooLarge);
  EXPECT_THROW(brute_force_ric(C, 0), std::invalid_argument);
  EXPECT_THROW(brute_force_ric(C.leftCols(3), 2), std::invalid_argument);
}

TEST(Nsp, GapUsesWorstSupport) {
  Rng rng(7);
  const CMatrix C = random_real_matrix(3, 6, rng);
  const CVector x = random_cvector(6, rng);
  const double rho = 0.4, tau = 0.7;
  double oracle = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) != 2) continue;
    double in = 0.0, out = 0.0;
    for (Eigen::Index k = 0; k < 6; ++k) ((mask & (1u << k)) ? in : out) += std::abs(x[k]);
    oracle = std::max(oracle, in - rho * out - tau * (C * x).norm());
  }
  EXPECT_NEAR(nsp_gap(C, x, 2, rho, tau), oracle, 1e-14);
}

TEST(Nsp, ProbesAreDeterministicAndNormalized) {
  Rng rng(8);
  const CMatrix C = random_real_matrix(4, 10, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    const CVector a = nsp_probe(C, 2, 42, i);
    EXPECT_EQ(a, nsp_probe(C, 2, 42, i));
    EXPECT_NEAR(a.cwiseAbs().sum(), 1.0, 1e-14);
  }
  // Every third probe lies in the null space.
  EXPECT_LT((C * nsp_probe(C, 2, 42, 2)).norm(), 1e-12);
}

TEST(Nsp, UnitaryMatrixSatisfies) {
  Rng rng(9);
  const CMatrix Q = testing::random_cmatrix(10, 10, rng).householderQr().householderQ();
  const NspReport rep = probe_nsp(Q, 1, 0.5, 10.0, 300, 1);
  EXPECT_TRUE(rep.satisfied_on_probes);
  EXPECT_LT(rep.worst_violation, 0.0);
  EXPECT_EQ(rep.probes, 300u);
}

TEST(Nsp, WideMatrixIsFalsified) {
  Rng rng(10);
  const CMatrix C = random_real_matrix(2, 10, rng);
  const NspReport rep = probe_nsp(C, 3, 0.1, 0.1, 30, 1);
  EXPECT_FALSE(rep.satisfied_on_probes);
  EXPECT_GT(rep.worst_violation, 0.0);
  EXPECT_NEAR(nsp_gap(C, nsp_probe(C, 3, 1, rep.worst_probe), 3, 0.1, 0.1), rep.worst_violation, 1e-15);
}

TEST(Nsp, ArgumentChecks) {
  const CMatrix C = CMatrix::Identity(4, 4);
  EXPECT_THROW(probe_nsp(C, 1, 1.0, 1.0, 10, 0), std::invalid_argument);
  EXPECT_THROW(probe_nsp(C, 1, 0.5, 0.0, 10, 0), std::invalid_argument);
  EXPECT_THROW(probe_nsp(C, 5, 0.5, 1.0, 10, 0), std::invalid_argument);
}

TEST(CxBounds, Values) {
  const CMatrix C = CMatrix::Identity(3, 3);
  CVector x(3);
  x << 3.0, cplx(0.0, -2.0), 1.0;
  const CxBoundsReport rep = check_cx_bounds(C, 1, 0.5, 2.0, 0.0, x);
  EXPECT_DOUBLE_EQ(rep.lower, (3.0 - 0.5 * 3.0) / 2.0);
  EXPECT_DOUBLE_EQ(rep.value, std::sqrt(14.0));
  EXPECT_DOUBLE_EQ(rep.upper, std::sqrt(14.0) + 6.0 / std::sqrt(2.0));
  EXPECT_TRUE(rep.lower_holds);
  EXPECT_TRUE(rep.upper_holds);
  EXPECT_THROW(check_cx_bounds(C, 0, 0.5, 2.0, 0.0, x), std::invalid_argument);
}

}  // namespace
}  // namespace cpr
