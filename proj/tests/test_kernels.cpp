#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cpr/kernels.hpp"
#include "test_util.hpp"

namespace cpr {
namespace {

using testing::random_cvector;

// Odd lengths exercise the vector tails.
const std::vector<Eigen::Index> kLengths{0, 1, 2, 3, 5, 8, 17, 64, 257};

CVector with_zeros(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  CVector v = random_cvector(n, rng);
  for (Eigen::Index i = 0; i < n; i += 3) v[i] = 0.0;
  return v;
}

TEST(Kernels, BackendNames) {
  EXPECT_EQ(kernels::backend_name(kernels::Backend::kScalar), "scalar");
  EXPECT_EQ(kernels::backend_name(kernels::Backend::kAvx2), "avx2");
}

TEST(Kernels, SetBackendRoundTrip) {
  const auto before = kernels::active_backend();
  kernels::set_backend(kernels::Backend::kScalar);
  EXPECT_EQ(kernels::active_backend(), kernels::Backend::kScalar);
  if (kernels::avx2_supported()) {
    kernels::set_backend(kernels::Backend::kAvx2);
    EXPECT_EQ(kernels::active_backend(), kernels::Backend::kAvx2);
  } else {
    EXPECT_THROW(kernels::set_backend(kernels::Backend::kAvx2), std::invalid_argument);
  }
  kernels::set_backend(before);
}

TEST(Kernels, ScalarMatchesDefinitions) {
  const CVector z = with_zeros(17, 3);
  RVector mag(z.size());
  kernels::scalar::squared_magnitudes(kernels::view(z), kernels::view(mag));
  CVector st(z.size());
  kernels::scalar::soft_threshold(kernels::view(z), 0.4, kernels::view(st));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    EXPECT_DOUBLE_EQ(mag[i], std::norm(z[i]));
    const double a = std::abs(z[i]);
    const cplx expect = a > 0.4 ? z[i] * ((a - 0.4) / a) : cplx(0.0);
    EXPECT_NEAR(std::abs(st[i] - expect), 0.0, 1e-15);
  }
  const CVector w = with_zeros(17, 4);
  EXPECT_NEAR(kernels::scalar::conj_dot_real(kernels::view(z), kernels::view(w)), z.dot(w).real(), 1e-13);
  EXPECT_NEAR(kernels::scalar::l1_norm(kernels::view(z)), z.cwiseAbs().sum(), 1e-13);
}

TEST(Kernels, SoftThresholdKeepsZero) {
  CVector z = CVector::Zero(5);
  CVector out(5);
  kernels::soft_threshold(kernels::view(z), 0.0, kernels::view(out));
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_EQ(out[i], cplx(0.0));
    EXPECT_FALSE(std::isnan(out[i].real()));
  }
}

#if defined(__x86_64__) || defined(_M_X64)
class Avx2Equivalence : public ::testing::TestWithParam<Eigen::Index> {
 protected:
  void SetUp() override {
    if (!kernels::avx2_supported()) GTEST_SKIP() << "CPU lacks AVX2";
  }
};

TEST_P(Avx2Equivalence, ElementwiseBitIdentical) {
  const Eigen::Index n = GetParam();
  const CVector z = with_zeros(n, 11 + static_cast<std::uint64_t>(n));
  RVector a(n), b(n);
  kernels::scalar::squared_magnitudes(kernels::view(z), kernels::view(a));
  kernels::avx2::squared_magnitudes(kernels::view(z), kernels::view(b));
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(a[i], b[i]) << i;

  for (double kappa : {0.0, 0.3, 1.0, 10.0}) {
    CVector s1(n), s2(n);
    kernels::scalar::soft_threshold(kernels::view(z), kappa, kernels::view(s1));
    kernels::avx2::soft_threshold(kernels::view(z), kappa, kernels::view(s2));
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(s1[i], s2[i]) << "kappa " << kappa << " i " << i;
  }

  CVector c1 = z, c2 = z;
  kernels::scalar::scale(kernels::view(c1), -2.5);
  kernels::avx2::scale(kernels::view(c2), -2.5);
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(c1[i], c2[i]);
}

TEST_P(Avx2Equivalence, ReductionsAgreeToRounding) {
  const Eigen::Index n = GetParam();
  const CVector a = with_zeros(n, 100 + static_cast<std::uint64_t>(n));
  const CVector b = with_zeros(n, 200 + static_cast<std::uint64_t>(n));
  const double scale = 1.0 + a.squaredNorm() + b.squaredNorm();
  EXPECT_NEAR(kernels::scalar::conj_dot_real(kernels::view(a), kernels::view(b)),
              kernels::avx2::conj_dot_real(kernels::view(a), kernels::view(b)), 1e-13 * scale);
  EXPECT_NEAR(kernels::scalar::l1_norm(kernels::view(a)), kernels::avx2::l1_norm(kernels::view(a)),
              1e-13 * (1.0 + a.cwiseAbs().sum()));
}

INSTANTIATE_TEST_SUITE_P(Lengths, Avx2Equivalence, ::testing::ValuesIn(kLengths));
#endif

}  // namespace
}  // namespace cpr
