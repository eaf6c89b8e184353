#include <cmath>

#include "cpr/kernels.hpp"

namespace cpr::kernels::scalar {

void squared_magnitudes(std::span<const cplx> in, std::span<double> out) {
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double re = in[k].real();
    const double im = in[k].imag();
    out[k] = re * re + im * im;
  }
}

void soft_threshold(std::span<const cplx> in, double kappa, std::span<cplx> out) {
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double re = in[k].real();
    const double im = in[k].imag();
    const double mag = std::sqrt(re * re + im * im);
    const double shrunk = std::max(mag - kappa, 0.0);
    const double factor = mag > 0.0 ? shrunk / mag : 0.0;
    out[k] = {re * factor, im * factor};
  }
}

double conj_dot_real(std::span<const cplx> a, std::span<const cplx> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += a[k].real() * b[k].real();
    acc += a[k].imag() * b[k].imag();
  }
  return acc;
}

double l1_norm(std::span<const cplx> z) {
  double acc = 0.0;
  for (const auto& v : z) acc += std::sqrt(v.real() * v.real() + v.imag() * v.imag());
  return acc;
}

void scale(std::span<cplx> z, double w) {
  for (auto& v : z) v = {v.real() * w, v.imag() * w};
}

}  // namespace cpr::kernels::scalar
