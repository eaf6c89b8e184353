#pragma once

// Data-parallel inner loops used by the solvers. Every entry point has a
// scalar reference implementation and, on x86-64, an AVX2 variant picked at
// runtime. Elementwise kernels produce bit-identical output across backends;
// reductions agree to rounding.

#include <span>
#include <string_view>

#include "cpr/types.hpp"

namespace cpr::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend b);
bool avx2_supported();

// Selected once from CPU features; CPR_KERNELS=scalar forces the reference path.
Backend active_backend();
// Throws std::invalid_argument if the CPU cannot run `b`.
void set_backend(Backend b);

// out[k] = |in[k]|^2
void squared_magnitudes(std::span<const cplx> in, std::span<double> out);
// out[k] = in[k] * max(|in[k]| - kappa, 0) / |in[k]|, and 0 where in[k] = 0.
void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out);
// Re sum conj(a[k]) b[k]
double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b);
// sum |z[k]|
double l1_norm(std::span<const cplx> z);
// z[k] *= w
void scale(std::span<cplx> z, double w);

namespace scalar {
void squared_magnitudes(std::span<const cplx> in, std::span<double> out);
void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out);
double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b);
double l1_norm(std::span<const cplx> z);
void scale(std::span<cplx> z, double w);
}  // namespace scalar

namespace avx2 {
void squared_magnitudes(std::span<const cplx> in, std::span<double> out);
void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out);
double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b);
double l1_norm(std::span<const cplx> z);
void scale(std::span<cplx> z, double w);
}  // namespace avx2

// Eigen conveniences.
inline std::span<const cplx> view(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<cplx> view(CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> view(RVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace cpr::kernels
