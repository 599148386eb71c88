#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dfx/nn/tensor.hpp"

namespace dfx::nn {

/// Seeded random source. Every distribution is derived here from raw
/// mt19937_64 output, so a seed fixes the draw sequence independent of the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);
  /// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

  std::vector<std::size_t> permutation(std::size_t n);

  /// Independent stream for a sub-task, derived from this generator's seed.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

Tensor sample_normal(Rng& rng, Shape shape);
Tensor sample_uniform(Rng& rng, Shape shape, double lo = 0.0, double hi = 1.0);
Tensor sample_beta(Rng& rng, double a, double b, Shape shape);

}  // namespace dfx::nn
