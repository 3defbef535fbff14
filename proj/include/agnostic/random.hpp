#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace agnostic {

// Seeded 64-bit generator. Conversions to doubles and indices are done here
// rather than through <random> distributions so that streams are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent seed for a named stream, e.g. ("dropout-target", 0).
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index = 0);

}  // namespace agnostic
