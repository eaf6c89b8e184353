// Backend selection only; no intrinsics here.

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "cpr/kernels.hpp"

namespace cpr::kernels {
namespace {

Backend detect() {
  if (const char* env = std::getenv("CPR_KERNELS"); env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Backend::kScalar;
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

std::string_view backend_name(Backend b) { return b == Backend::kAvx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
#if defined(CPR_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_supported()) {
    throw std::invalid_argument("avx2 kernels not supported on this CPU/build");
  }
  current().store(b, std::memory_order_relaxed);
}

#if defined(CPR_HAVE_AVX2)
#define CPR_DISPATCH(call)                                              \
  do {                                                                  \
    if (active_backend() == Backend::kAvx2) return avx2::call;          \
    return scalar::call;                                                \
  } while (0)
#else
#define CPR_DISPATCH(call) return scalar::call
#endif

void squared_magnitudes(std::span<const cplx> in, std::span<double> out) {
  CPR_DISPATCH(squared_magnitudes(in, out));
}

void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out) {
  CPR_DISPATCH(soft_threshold(in, kappa, out));
}

double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b) { CPR_DISPATCH(conj_dot_real(a, b)); }

double l1_norm(std::span<const cplx> z) { CPR_DISPATCH(l1_norm(z)); }

void scale(std::span<cplx> z, double w) { CPR_DISPATCH(scale(z, w)); }

#undef CPR_DISPATCH

}  // namespace cpr::kernels
