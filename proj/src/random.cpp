#include "home3/random.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace home3 {

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_unit();
  while (u1 <= 0.0) u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be > 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // One splitmix64 scramble of the combined word.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> PermutationSource::next_permutation(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("next_permutation: dim must be >= 1");
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = dim - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng_.next_below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

DenseVector coordinate_randomize(const DenseVector& x, PermutationSource& src) {
  if (x.dim() == 0) {
    throw std::invalid_argument("coordinate_randomize: dim must be >= 1");
  }
  const std::vector<std::size_t> perm = src.next_permutation(x.dim());
  DenseVector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[perm[i]];
  return out;
}

double operator_norm_estimate(PermutationSource& src, std::size_t dim,
                              std::size_t trials) {
  if (dim == 0) throw std::invalid_argument("operator_norm_estimate: dim must be >= 1");
  if (trials == 0) throw std::invalid_argument("operator_norm_estimate: trials must be >= 1");
  double worst = 0.0;
  DenseVector x(dim);
  for (std::size_t t = 0; t < trials; ++t) {
    double nx = 0.0;
    do {
      for (std::size_t i = 0; i < dim; ++i) x[i] = src.rng().next_uniform(-1.0, 1.0);
      nx = norm2(x);
    } while (nx == 0.0);
    const DenseVector rx = coordinate_randomize(x, src);
    const double ratio = norm2(rx) / nx;
    if (ratio > worst) worst = ratio;
  }
  return worst;
}

}  // namespace home3
