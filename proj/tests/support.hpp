#pragma once

#include <cstdint>
#include <random>

#include "minlor/neutral.hpp"

namespace minlor::testing {

inline constexpr int kRandomCases = 100;

/// Deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  double nonzero(double lo, double hi) { return (coin() ? 1.0 : -1.0) * uniform(lo, hi); }

  NeutralVector vector(double scale = 1.0) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace minlor::testing
