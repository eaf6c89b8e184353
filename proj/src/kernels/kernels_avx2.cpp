// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "cpr/kernels.hpp"

namespace cpr::kernels::avx2 {
namespace {

inline const double* raw(std::span<const cplx> s) { return reinterpret_cast<const double*>(s.data()); }
inline double* raw(std::span<cplx> s) { return reinterpret_cast<double*>(s.data()); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// [r0,i0,r1,i1] -> [|z0|^2, |z0|^2, |z1|^2, |z1|^2]
inline __m256d magsq_dup(__m256d z) {
  const __m256d sq = _mm256_mul_pd(z, z);
  return _mm256_add_pd(sq, _mm256_permute_pd(sq, 0b0101));
}

}  // namespace

void squared_magnitudes(std::span<const cplx> in, std::span<double> out) {
  const double* p = raw(in);
  const std::size_t n = in.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d a = _mm256_loadu_pd(p + 2 * k);
    const __m256d b = _mm256_loadu_pd(p + 2 * k + 4);
    // hadd -> [|z0|^2, |z2|^2, |z1|^2, |z3|^2]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    _mm256_storeu_pd(out.data() + k, _mm256_permute4x64_pd(h, 0b11011000));
  }
  for (; k < n; ++k) {
    const double re = in[k].real();
    const double im = in[k].imag();
    out[k] = re * re + im * im;
  }
}

void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out) {
  const double* p = raw(in);
  double* q = raw(out);
  const std::size_t n = in.size();
  const __m256d vk = _mm256_set1_pd(kappa);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d z = _mm256_loadu_pd(p + 2 * k);
    const __m256d mag = _mm256_sqrt_pd(magsq_dup(z));
    const __m256d shrunk = _mm256_max_pd(_mm256_sub_pd(mag, vk), zero);
    const __m256d positive = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    const __m256d factor = _mm256_and_pd(_mm256_div_pd(shrunk, mag), positive);
    _mm256_storeu_pd(q + 2 * k, _mm256_mul_pd(z, factor));
  }
  for (; k < n; ++k) {
    const double re = in[k].real();
    const double im = in[k].imag();
    const double mag = std::sqrt(re * re + im * im);
    const double shrunk = std::max(mag - kappa, 0.0);
    const double factor = mag > 0.0 ? shrunk / mag : 0.0;
    out[k] = {re * factor, im * factor};
  }
}

double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b) {
  // Interleaved re/im: Re(conj(a) b) is a plain real dot over 2n doubles.
  const double* x = raw(a);
  const double* y = raw(b);
  const std::size_t n = 2 * a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += x[k] * y[k];
  return acc;
}

double l1_norm(std::span<const cplx> z) {
  const double* p = raw(z);
  const std::size_t n = z.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(magsq_dup(_mm256_loadu_pd(p + 2 * k))));
  }
  // Each modulus appears twice in the accumulator.
  double total = 0.5 * hsum(acc);
  for (; k < n; ++k) total += std::sqrt(z[k].real() * z[k].real() + z[k].imag() * z[k].imag());
  return total;
}

void scale(std::span<cplx> z, double w) {
  double* p = raw(z);
  const std::size_t n = 2 * z.size();
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(p + k, _mm256_mul_pd(_mm256_loadu_pd(p + k), vw));
  for (; k < n; ++k) p[k] *= w;
}

}  // namespace cpr::kernels::avx2
