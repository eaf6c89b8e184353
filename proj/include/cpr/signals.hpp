#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cpr/rng.hpp"
#include "cpr/types.hpp"

namespace cpr {

struct SparseSignal {
  CVector values;
  std::vector<std::size_t> support;  // sorted
  std::size_t n = 0;
  std::size_t s = 0;
};

// Phase-aligned comparison of an estimate against ground truth.
struct ErrorReport {
  double aligned_l2 = 0.0;
  // Undefined (nullopt) when the reference vector is zero.
  std::optional<double> relative_l2;
  std::optional<double> relative_db;
  double theta_star = 0.0;  // in [0, 2pi)
};

// Unit-norm s-sparse vector: support uniform without replacement, nonzeros
// standard complex Gaussian before normalization.
SparseSignal gen_sparse_signal(std::size_t n, std::size_t s, Rng& rng);

// <a, b> = sum conj(a_k) b_k
cplx inner(const CVector& a, const CVector& b);

// min over theta of ||e^{i theta} x - xhat||_2, closed form.
ErrorReport align_phase(const CVector& x, const CVector& xhat);

// 20 log10 of an l2 ratio; -inf for 0.
double to_db(double ratio);

enum class Norm { kL1 = 1, kL2 = 2 };

// ||x - x_S|| for S the s largest-magnitude entries (ties: lowest index).
double best_s_term_error(const CVector& x, std::size_t s, Norm norm);

// Indices of the s largest-magnitude entries, ties broken by lowest index.
std::vector<std::size_t> largest_entries(const CVector& x, std::size_t s);

}  // namespace cpr
