#include "cpr/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace cpr {

SparseSignal gen_sparse_signal(std::size_t n, std::size_t s, Rng& rng) {
  if (s == 0 || s > n) {
    throw std::invalid_argument("gen_sparse_signal: need 1 <= s <= n (got s=" + std::to_string(s) +
                                ", n=" + std::to_string(n) + ")");
  }
  // Partial Fisher-Yates gives a uniform s-subset.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> support(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
  std::sort(support.begin(), support.end());

  SparseSignal sig;
  sig.n = n;
  sig.s = s;
  sig.values = CVector::Zero(static_cast<Eigen::Index>(n));
  for (auto idx : support) sig.values[static_cast<Eigen::Index>(idx)] = rng.complex_normal();
  const double nrm = sig.values.norm();
  // Probability zero, but a degenerate draw would otherwise divide by zero.
  if (nrm > 0.0) sig.values /= nrm;
  sig.support = std::move(support);
  return sig;
}

cplx inner(const CVector& a, const CVector& b) { return a.dot(b); }

double to_db(double ratio) {
  return ratio > 0.0 ? 20.0 * std::log10(ratio) : -std::numeric_limits<double>::infinity();
}

ErrorReport align_phase(const CVector& x, const CVector& xhat) {
  if (x.size() != xhat.size()) {
    throw std::invalid_argument("align_phase: length mismatch (" + std::to_string(x.size()) + " vs " +
                                std::to_string(xhat.size()) + ")");
  }
  // ||e^{it}x - xhat||^2 = |x|^2 + |xhat|^2 - 2 Re(e^{it} <xhat, x>), minimized at t = arg(<x, xhat>).
  const cplx c = inner(x, xhat);
  double theta = std::abs(c) > 0.0 ? std::arg(c) : 0.0;
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  if (theta >= 2.0 * std::numbers::pi) theta = 0.0;

  ErrorReport rep;
  rep.theta_star = theta;
  const double xx = x.squaredNorm();
  // Direct evaluation; the expanded form loses all digits near zero error.
  rep.aligned_l2 = (std::polar(1.0, theta) * x - xhat).norm();
  if (xx > 0.0) {
    rep.relative_l2 = rep.aligned_l2 / std::sqrt(xx);
    rep.relative_db = to_db(*rep.relative_l2);
  }
  return rep;
}

std::vector<std::size_t> largest_entries(const CVector& x, std::size_t s) {
  std::vector<std::size_t> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x[static_cast<Eigen::Index>(a)]) > std::abs(x[static_cast<Eigen::Index>(b)]);
  });
  order.resize(std::min(s, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

double best_s_term_error(const CVector& x, std::size_t s, Norm norm) {
  if (s > static_cast<std::size_t>(x.size())) {
    throw std::invalid_argument("best_s_term_error: s exceeds vector length");
  }
  const auto keep = largest_entries(x, s);
  std::vector<bool> kept(static_cast<std::size_t>(x.size()), false);
  for (auto k : keep) kept[k] = true;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (kept[static_cast<std::size_t>(k)]) continue;
    const double a = std::abs(x[k]);
    acc += norm == Norm::kL1 ? a : a * a;
  }
  return norm == Norm::kL1 ? acc : std::sqrt(acc);
}

}  // namespace cpr
