#pragma once

#include <cstdint>
#include <vector>

#include "home3/tensor.hpp"

namespace home3 {

// Self-contained splitmix64 stream. Hand-rolled so that traces are
// byte-identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double next_gaussian();

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream for (seed, index) pairs, e.g. per-iteration
// noise draws keyed by run seed + iteration.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Seeded source of uniformly distributed permutations. Single-owner: each
// run holds its own source so draws are reproducible and never shared.
class PermutationSource {
 public:
  explicit PermutationSource(std::uint64_t seed) : rng_(seed) {}

  // Uniform permutation of {0..dim-1} via unbiased Fisher-Yates.
  std::vector<std::size_t> next_permutation(std::size_t dim);

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// Applies a freshly drawn permutation to the coordinates of x. Preserves the
// entry multiset exactly; the Euclidean norm is preserved to ~1e-16 relative
// (norms sum in canonical index order with compensation).
DenseVector coordinate_randomize(const DenseVector& x, PermutationSource& src);

// Empirical sup of ||Rx|| / ||x|| over `trials` random nonzero vectors.
double operator_norm_estimate(PermutationSource& src, std::size_t dim,
                              std::size_t trials);

}  // namespace home3
