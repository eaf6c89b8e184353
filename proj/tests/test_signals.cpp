#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "cpr/signals.hpp"
#include "test_util.hpp"

namespace cpr {
namespace {

using testing::random_cvector;

TEST(SparseSignal, ShapeAndNorm) {
  Rng rng(1);
  for (std::size_t s : {1u, 3u, 10u, 64u}) {
    const SparseSignal x = gen_sparse_signal(64, s, rng);
    EXPECT_EQ(x.n, 64u);
    EXPECT_EQ(x.s, s);
    ASSERT_EQ(x.support.size(), s);
    EXPECT_TRUE(std::is_sorted(x.support.begin(), x.support.end()));
    EXPECT_EQ(std::set<std::size_t>(x.support.begin(), x.support.end()).size(), s);
    EXPECT_NEAR(x.values.norm(), 1.0, 1e-14);
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < x.values.size(); ++i) nonzero += x.values[i] != cplx(0.0);
    EXPECT_EQ(nonzero, s);
    for (auto k : x.support) EXPECT_NE(x.values[static_cast<Eigen::Index>(k)], cplx(0.0));
  }
}

TEST(SparseSignal, Deterministic) {
  Rng a(99), b(99);
  const SparseSignal x = gen_sparse_signal(50, 4, a);
  const SparseSignal y = gen_sparse_signal(50, 4, b);
  EXPECT_EQ(x.support, y.support);
  EXPECT_EQ(x.values, y.values);
}

TEST(SparseSignal, SupportIsUniform) {
  // Each index lands in the support with probability s/n.
  Rng rng(7);
  const std::size_t n = 10, s = 3, draws = 20000;
  std::vector<double> hits(n, 0.0);
  for (std::size_t t = 0; t < draws; ++t) {
    for (auto k : gen_sparse_signal(n, s, rng).support) hits[k] += 1.0;
  }
  const double p = static_cast<double>(s) / n;
  const double sd = std::sqrt(p * (1 - p) / draws);
  for (double h : hits) EXPECT_NEAR(h / draws, p, 5 * sd);
}

TEST(SparseSignal, RejectsBadSparsity) {
  Rng rng(1);
  EXPECT_THROW(gen_sparse_signal(8, 0, rng), std::invalid_argument);
  EXPECT_THROW(gen_sparse_signal(8, 9, rng), std::invalid_argument);
}

TEST(Inner, ConjugatesFirstArgument) {
  Rng rng(2);
  const CVector a = random_cvector(6, rng), b = random_cvector(6, rng);
  cplx direct = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) direct += std::conj(a[i]) * b[i];
  EXPECT_NEAR(std::abs(inner(a, b) - direct), 0.0, 1e-14);
  const cplx i1(0.0, 1.0);
  EXPECT_NEAR(std::abs(inner(CVector(i1 * a), b) + i1 * inner(a, b)), 0.0, 1e-14);
}

TEST(ToDb, Values) {
  EXPECT_DOUBLE_EQ(to_db(0.1), -20.0);
  EXPECT_DOUBLE_EQ(to_db(1.0), 0.0);
  EXPECT_EQ(to_db(0.0), -std::numeric_limits<double>::infinity());
}

// Oracle: brute-force minimization over a uniform theta grid.
double grid_min(const CVector& x, const CVector& xhat, std::size_t points, double* arg = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points);
    const double d = (std::polar(1.0, th) * x - xhat).norm();
    if (d < best) {
      best = d;
      if (arg != nullptr) *arg = th;
    }
  }
  return best;
}

TEST(AlignPhase, MatchesThetaGridOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const CVector x = random_cvector(4, rng);
    const CVector xhat = random_cvector(4, rng);
    double th_grid = 0.0;
    const double oracle = grid_min(x, xhat, 1'000'000, &th_grid);
    const ErrorReport rep = align_phase(x, xhat);
    EXPECT_LE(rep.aligned_l2, oracle + 1e-12);
    EXPECT_NEAR(rep.aligned_l2, oracle, 1e-8);
    double dth = std::abs(rep.theta_star - th_grid);
    dth = std::min(dth, 2.0 * std::numbers::pi - dth);
    EXPECT_LT(dth, 1e-4);
  }
}

TEST(AlignPhase, RecoversGlobalPhase) {
  Rng rng(6);
  const CVector x = random_cvector(9, rng);
  for (double phi : {0.0, 0.5, 3.0, 5.9}) {
    const ErrorReport rep = align_phase(x, std::polar(1.0, phi) * x);
    EXPECT_NEAR(rep.aligned_l2, 0.0, 1e-13);
    EXPECT_NEAR(rep.theta_star, phi, 1e-12);
    ASSERT_TRUE(rep.relative_l2.has_value());
    EXPECT_NEAR(*rep.relative_l2, 0.0, 1e-13);
  }
}

TEST(AlignPhase, RelativeAndDb) {
  Rng rng(8);
  const CVector x = 3.0 * random_cvector(5, rng);
  const CVector xhat = x + 0.01 * random_cvector(5, rng);
  const ErrorReport rep = align_phase(x, xhat);
  ASSERT_TRUE(rep.relative_l2 && rep.relative_db);
  EXPECT_NEAR(*rep.relative_l2, rep.aligned_l2 / x.norm(), 1e-15);
  EXPECT_NEAR(*rep.relative_db, 20.0 * std::log10(*rep.relative_l2), 1e-12);
  EXPECT_GE(rep.theta_star, 0.0);
  EXPECT_LT(rep.theta_star, 2.0 * std::numbers::pi);
}

TEST(AlignPhase, ZeroReferenceHasNoRelativeError) {
  Rng rng(9);
  const CVector xhat = random_cvector(4, rng);
  const ErrorReport rep = align_phase(CVector::Zero(4), xhat);
  EXPECT_FALSE(rep.relative_l2.has_value());
  EXPECT_FALSE(rep.relative_db.has_value());
  EXPECT_NEAR(rep.aligned_l2, xhat.norm(), 1e-14);
}

TEST(AlignPhase, LengthMismatchThrows) {
  EXPECT_THROW(align_phase(CVector::Zero(3), CVector::Zero(4)), std::invalid_argument);
}

// Oracle: every size-s subset.
double exhaustive_best_s(const CVector& x, std::size_t s, Norm norm) {
  const auto n = static_cast<std::size_t>(x.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != s) continue;
    CVector r = x;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1u << k)) r[static_cast<Eigen::Index>(k)] = 0.0;
    }
    best = std::min(best, norm == Norm::kL1 ? r.cwiseAbs().sum() : r.norm());
  }
  return best;
}

TEST(BestSTerm, MatchesExhaustiveOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const CVector x = random_cvector(8, rng);
    for (std::size_t s = 0; s <= 8; ++s) {
      for (Norm nm : {Norm::kL1, Norm::kL2}) {
        EXPECT_NEAR(best_s_term_error(x, s, nm), exhaustive_best_s(x, s, nm), 1e-13) << "s=" << s;
      }
    }
  }
}

TEST(BestSTerm, SparseVectorHasZeroError) {
  Rng rng(11);
  const SparseSignal x = gen_sparse_signal(30, 4, rng);
  EXPECT_EQ(best_s_term_error(x.values, 4, Norm::kL1), 0.0);
  EXPECT_GT(best_s_term_error(x.values, 3, Norm::kL1), 0.0);
}

TEST(LargestEntries, TiesGoToLowestIndex) {
  CVector x(5);
  x << 1.0, cplx(0.0, 1.0), 0.5, 1.0, 1.0;
  EXPECT_EQ(largest_entries(x, 2), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(largest_entries(x, 4), (std::vector<std::size_t>{0, 1, 3, 4}));
  EXPECT_TRUE(largest_entries(x, 0).empty());
}

}  // namespace
}  // namespace cpr
