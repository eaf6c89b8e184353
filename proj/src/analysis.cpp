#include "cpr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cpr/rng.hpp"
#include "cpr/signals.hpp"

namespace cpr {
namespace {

// Advances a sorted k-combination of [0, n); false after the last one.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double support_deviation(const CMatrix& C, const std::vector<std::size_t>& support) {
  CMatrix sub(C.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = C.col(static_cast<Eigen::Index>(support[j]));
  Eigen::JacobiSVD<CMatrix> svd(sub);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  // Fewer rows than columns: the smallest singular value is zero.
  const double smin = sub.cols() > sub.rows() || sv.size() == 0 ? 0.0 : sv[sv.size() - 1];
  return std::max(smax * smax - 1.0, 1.0 - smin * smin);
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

RicReport brute_force_ric(const CMatrix& C, std::size_t s, unsigned threads) {
  const auto n = static_cast<std::size_t>(C.cols());
  const std::size_t k = 2 * s;
  if (s == 0 || k > n) {
    throw std::invalid_argument("brute_force_ric: need 1 <= 2s <= N (s=" + std::to_string(s) + ", N=" +
                                std::to_string(n) + ")");
  }
  const std::uint64_t count = binomial(n, k);
  if (count > kMaxEnumeratedSupports) {
    throw EnumerationTooLarge("brute_force_ric: C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " +
                              (count == std::numeric_limits<std::uint64_t>::max() ? std::string("overflow")
                                                                                   : std::to_string(count)) +
                              " supports exceeds the limit of " + std::to_string(kMaxEnumeratedSupports) +
                              "; shrink N or s (N <= 16, s <= 2 is instant)");
  }

  threads = std::max(1u, threads);
  struct Partial {
    double delta = -std::numeric_limits<double>::infinity();
    std::uint64_t rank = 0;
    std::vector<std::size_t> support;
  };
  std::vector<Partial> partial(threads);
  auto work = [&](unsigned t) {
    std::vector<std::size_t> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = i;
    std::uint64_t rank = 0;
    do {
      if (rank % threads == t) {
        const double d = support_deviation(C, c);
        // Strict comparison keeps the lowest-rank maximizer.
        if (d > partial[t].delta) partial[t] = {d, rank, c};
      }
      ++rank;
    } while (next_combination(c, n));
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }

  // Merge by max, ties to lowest rank, so the report is schedule independent.
  const Partial* best = &partial[0];
  for (const auto& p : partial) {
    if (p.support.empty()) continue;
    if (best->support.empty() || p.delta > best->delta || (p.delta == best->delta && p.rank < best->rank)) best = &p;
  }
  RicReport rep;
  rep.order = k;
  rep.delta = best->delta;
  rep.enumerated_supports = count;
  rep.worst_support = best->support;
  return rep;
}

double nsp_gap(const CMatrix& C, const CVector& x, std::size_t s, double rho, double tau) {
  const auto S = largest_entries(x, s);
  double in = 0.0;
  for (auto k : S) in += std::abs(x[static_cast<Eigen::Index>(k)]);
  const double out = x.cwiseAbs().sum() - in;
  return in - rho * out - tau * (C * x).norm();
}

CVector nsp_probe(const CMatrix& C, std::size_t s, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed({seed, index}));
  const Eigen::Index n = C.cols();
  const Eigen::Index m = C.rows();
  CVector x(n);
  switch (index % 3) {
    case 0:
      for (Eigen::Index k = 0; k < n; ++k) x[k] = rng.complex_normal();
      break;
    case 1: {
      const auto sig = gen_sparse_signal(static_cast<std::size_t>(n), std::min<std::size_t>(s, n), rng);
      const double tail = 1e-2 * rng.uniform();
      for (Eigen::Index k = 0; k < n; ++k) x[k] = sig.values[k] + tail * rng.complex_normal();
      break;
    }
    default: {
      if (m >= n) {
        for (Eigen::Index k = 0; k < n; ++k) x[k] = rng.complex_normal();
        break;
      }
      // Random vector minus its row-space component lies in ker C.
      CVector g(n);
      for (Eigen::Index k = 0; k < n; ++k) g[k] = rng.complex_normal();
      const Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(C);
      x = g - cod.solve(C * g);
      break;
    }
  }
  const double l1 = x.cwiseAbs().sum();
  if (l1 > 0.0) x /= l1;
  return x;
}

NspReport probe_nsp(const CMatrix& C, std::size_t s, double rho, double tau, std::size_t probes, std::uint64_t seed) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("probe_nsp: rho must lie in (0, 1)");
  if (!(tau > 0.0)) throw std::invalid_argument("probe_nsp: tau must be positive");
  if (s == 0 || s > static_cast<std::size_t>(C.cols())) throw std::invalid_argument("probe_nsp: need 1 <= s <= N");

  NspReport rep;
  rep.s = s;
  rep.rho = rho;
  rep.tau = tau;
  rep.probes = probes;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probes; ++i) {
    const double gap = nsp_gap(C, nsp_probe(C, s, seed, i), s, rho, tau);
    if (gap > rep.worst_violation) {
      rep.worst_violation = gap;
      rep.worst_probe = i;
    }
  }
  rep.satisfied_on_probes = rep.worst_violation <= 0.0;
  return rep;
}

CxBoundsReport check_cx_bounds(const CMatrix& C, std::size_t s, double rho, double tau, double delta2s,
                               const CVector& x) {
  if (s == 0) throw std::invalid_argument("check_cx_bounds: s must be positive");
  CxBoundsReport rep;
  const auto S = largest_entries(x, s);
  double in = 0.0;
  for (auto k : S) in += std::abs(x[static_cast<Eigen::Index>(k)]);
  const double l1 = x.cwiseAbs().sum();
  rep.lower = (in - rho * (l1 - in)) / tau;
  rep.value = (C * x).norm();
  rep.upper = std::sqrt(std::max(0.0, 1.0 - delta2s)) * (x.norm() + l1 / std::sqrt(2.0 * static_cast<double>(s)));
  rep.lower_holds = rep.lower <= rep.value;
  rep.upper_holds = rep.value <= rep.upper;
  return rep;
}

}  // namespace cpr
