#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "home3/random.hpp"

using namespace home3;

TEST_CASE("equal seeds reproduce the permutation stream") {
  PermutationSource a(42), b(42);
  for (int k = 0; k < 50; ++k) {
    CHECK(a.next_permutation(9) == b.next_permutation(9));
  }
}

TEST_CASE("every drawn permutation is a bijection") {
  PermutationSource src(7);
  std::vector<std::size_t> expected(12);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  for (int k = 0; k < 100; ++k) {
    std::vector<std::size_t> p = src.next_permutation(12);
    std::sort(p.begin(), p.end());
    CHECK(p == expected);
  }
}

TEST_CASE("coordinate_randomize on a single coordinate is the identity") {
  PermutationSource src(1);
  const DenseVector x{5.0};
  CHECK(coordinate_randomize(x, src)[0] == 5.0);
}

TEST_CASE("coordinate_randomize preserves multiset and norm") {
  PermutationSource src(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    DenseVector x(64);
    for (double& v : x.data) v = src.rng().next_uniform(-10.0, 10.0);
    const DenseVector y = coordinate_randomize(x, src);

    std::vector<double> sx = x.data, sy = y.data;
    std::sort(sx.begin(), sx.end());
    std::sort(sy.begin(), sy.end());
    CHECK(sx == sy);

    CHECK(std::abs(norm2(y) / norm2(x) - 1.0) <= 1e-15);
  }
}

TEST_CASE("permutations at D=4 are close to uniform over all 24") {
  PermutationSource src(99);
  std::map<std::vector<std::size_t>, int> counts;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) counts[src.next_permutation(4)]++;
  CHECK(counts.size() == 24);
  for (const auto& [perm, count] : counts) {
    const double freq = static_cast<double>(count) / draws;
    CHECK(std::abs(freq - 1.0 / 24.0) <= 0.01);
  }
}

TEST_CASE("operator norm estimate is 1") {
  PermutationSource one(3);
  CHECK(operator_norm_estimate(one, 1, 10) == 1.0);

  PermutationSource big(4);
  CHECK(std::abs(operator_norm_estimate(big, 64, 1000) - 1.0) <= 1e-15);

  CHECK_THROWS_AS(operator_norm_estimate(one, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(operator_norm_estimate(one, 3, 0), std::invalid_argument);
}

TEST_CASE("mix_seed separates streams") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}

TEST_CASE("gaussian draws have roughly unit scale") {
  Rng rng(8);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}
