#pragma once

// Small-instance verifiers for compressive sensing matrices. Certifying the
// robust null space property is NP-hard in general: probe_nsp is a falsifier,
// and brute_force_ric is exact but only feasible for tiny N.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cpr/types.hpp"

namespace cpr {

// Refusal raised when exhaustive enumeration would be too large.
class EnumerationTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::uint64_t kMaxEnumeratedSupports = 1'000'000;

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct RicReport {
  std::size_t order = 0;  // 2s
  double delta = 0.0;
  std::uint64_t enumerated_supports = 0;
  std::vector<std::size_t> worst_support;
};

// Exact restricted isometry constant of order 2s: max over |T| = 2s of
// max(sigma_max(C_T)^2 - 1, 1 - sigma_min(C_T)^2). `threads` splits the
// support list; the result does not depend on it.
RicReport brute_force_ric(const CMatrix& C, std::size_t s, unsigned threads = 1);

struct NspReport {
  std::size_t s = 0;
  double rho = 0.0;
  double tau = 0.0;
  // max over probes of ||x_S||_1 - rho ||x_S^c||_1 - tau ||C x||_2, probes
  // scaled to unit l1 norm, S the worst support of size s.
  double worst_violation = 0.0;
  std::size_t worst_probe = 0;
  std::size_t probes = 0;
  bool satisfied_on_probes = true;
};

// Robust null space inequality value for x at its worst support of size s.
// The s largest moduli maximize the left side, so this is exact.
double nsp_gap(const CMatrix& C, const CVector& x, std::size_t s, double rho, double tau);

// Probe x for index i is a pure function of (seed, i). Probes cycle through
// dense Gaussian, concentrated on a random s-support with a small tail, and
// random null-space directions of C (when C has a nontrivial null space).
CVector nsp_probe(const CMatrix& C, std::size_t s, std::uint64_t seed, std::size_t index);
NspReport probe_nsp(const CMatrix& C, std::size_t s, double rho, double tau, std::size_t probes, std::uint64_t seed);

struct CxBoundsReport {
  double lower = 0.0;  // (1/tau) max_S (||x_S||_1 - rho ||x_S^c||_1)
  double value = 0.0;  // ||C x||_2
  double upper = 0.0;  // sqrt(1 - delta2s) (||x||_2 + ||x||_1 / sqrt(2s)), as stated
  bool lower_holds = true;
  bool upper_holds = true;
};

CxBoundsReport check_cx_bounds(const CMatrix& C, std::size_t s, double rho, double tau, double delta2s,
                               const CVector& x);

}  // namespace cpr
