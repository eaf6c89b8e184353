#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "cpr/types.hpp"

namespace cpr {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Order-sensitive combination of seed components.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Stable 64-bit FNV-1a hash for string tags (experiment ids).
std::uint64_t hash_tag(std::string_view tag);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double normal() { return normal_(engine_); }
  // Real and imaginary parts each N(0, 1/2).
  cplx complex_normal();
  double uniform() { return uniform_(engine_); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cpr
