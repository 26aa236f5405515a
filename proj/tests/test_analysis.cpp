#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "home3/analysis.hpp"
#include "home3/random.hpp"

using namespace home3;

TEST_CASE("rate_slope recovers forced power laws") {
  for (const double exponent : {-1.0, -5.0 / 6.0, -0.5}) {
    std::vector<double> losses(501);
    losses[0] = 1.0;
    for (std::size_t t = 1; t <= 500; ++t)
      losses[t] = std::pow(static_cast<double>(t), exponent);
    CHECK(std::abs(rate_slope(losses, 0.0, {1, 500}) - exponent) <= 1e-6);
  }
}

TEST_CASE("rate_slope of a constant sequence is zero") {
  std::vector<double> losses(100, 5.0);
  CHECK(std::abs(rate_slope(losses, 2.0, {1, 99})) <= 1e-12);
}

TEST_CASE("rate_slope names the index that touches the floor") {
  std::vector<double> losses{9.0, 3.0, 2.0, 1.0, 0.5};
  try {
    rate_slope(losses, 1.0, {1, 4});
    FAIL("expected floor violation");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("index 3") != std::string::npos);
  }
}

TEST_CASE("rate_slope window validation") {
  std::vector<double> losses{1.0, 0.9, 0.8, 0.7};
  CHECK_THROWS_AS(rate_slope(losses, 0.0, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(rate_slope(losses, 0.0, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(rate_slope(losses, 0.0, {1, 9}), std::invalid_argument);
}

TEST_CASE("icc of perfect within-group agreement is 1") {
  const IccReport rep = icc_oneway({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}});
  CHECK(rep.icc == 1.0);
  CHECK(rep.ms_within == 0.0);
  CHECK(!rep.degenerate);
}

TEST_CASE("icc with equal group means is at the negative boundary") {
  // group means all zero, all variance within groups: MSB = 0, so the
  // coefficient sits at its lower bound -1/(k-1) = -1 for k = 2
  const IccReport rep = icc_oneway({{1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}});
  CHECK(rep.ms_between == 0.0);
  CHECK(rep.icc == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rep.icc <= 0.0);
}

TEST_CASE("icc matches a from-scratch anova oracle on random tables") {
  Rng rng(0xa0a);
  for (int table = 0; table < 100; ++table) {
    std::vector<std::vector<double>> groups(5, std::vector<double>(3));
    for (auto& g : groups)
      for (double& v : g) v = rng.next_uniform(-4.0, 4.0);

    const IccReport rep = icc_oneway(groups);

    double grand = 0.0;
    for (const auto& g : groups)
      for (double v : g) grand += v;
    grand /= 15.0;
    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
      const double gm = (g[0] + g[1] + g[2]) / 3.0;
      ssb += 3.0 * (gm - grand) * (gm - grand);
      for (double v : g) ssw += (v - gm) * (v - gm);
    }
    const double msb = ssb / 4.0;
    const double msw = ssw / 10.0;
    const double icc = (msb - msw) / (msb + 2.0 * msw);
    CHECK(std::abs(rep.icc - icc) <= 1e-10);

    // the stored mean squares reconstruct the coefficient exactly
    CHECK(rep.icc == (rep.ms_between - rep.ms_within) /
                         (rep.ms_between + 2.0 * rep.ms_within));
  }
}

TEST_CASE("icc degenerate and precondition handling") {
  const IccReport rep = icc_oneway({{2.0, 2.0}, {2.0, 2.0}});
  CHECK(rep.icc == 1.0);
  CHECK(rep.degenerate);

  CHECK_THROWS_AS(icc_oneway({{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(icc_oneway({{1.0}, {2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(icc_oneway({{1.0, 2.0}, {1.0, 2.0, 3.0}}), std::invalid_argument);
}

namespace {

RunRecord record_with_final(double final_loss, double wall,
                            std::size_t randomizations = 0) {
  RunRecord r;
  r.losses = {1.0, 0.5, final_loss};
  r.grad_norms = {0.0, 1.0, 0.5};
  r.moment_gaps = {0.0, 0.7, 0.3};
  for (std::size_t i = 0; i < randomizations; ++i)
    r.randomization_events.push_back(i + 1);
  r.wall_time_seconds = wall;
  return r;
}

}  // namespace

TEST_CASE("summarize single and paired records") {
  const SummaryStats one = summarize({record_with_final(0.25, 1.5, 2)});
  CHECK(one.median_final == 0.25);
  CHECK(one.min_final == 0.25);
  CHECK(one.max_final == 0.25);
  CHECK(one.total_randomizations == 2);
  CHECK(one.median_wall_seconds == 1.5);

  const SummaryStats two =
      summarize({record_with_final(0.2, 1.0), record_with_final(0.4, 3.0)});
  CHECK(two.median_final == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(two.mean_wall_seconds == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("summarize matches a sort-based quantile oracle and ignores order") {
  Rng rng(0x50);
  std::vector<RunRecord> records;
  std::vector<double> finals;
  for (int i = 0; i < 10; ++i) {
    const double f = rng.next_uniform(0.0, 1.0);
    finals.push_back(f);
    records.push_back(record_with_final(f, rng.next_uniform(0.1, 2.0)));
  }
  const SummaryStats stats = summarize(records);

  std::sort(finals.begin(), finals.end());
  auto interp = [&](double q) {
    const double pos = q * 9.0;
    const std::size_t lo = static_cast<std::size_t>(pos);
    return finals[lo] + (pos - lo) * (finals[lo + 1 > 9 ? 9 : lo + 1] - finals[lo]);
  };
  CHECK(stats.median_final == doctest::Approx(interp(0.5)).epsilon(1e-15));
  CHECK(stats.q25_final == doctest::Approx(interp(0.25)).epsilon(1e-15));
  CHECK(stats.q75_final == doctest::Approx(interp(0.75)).epsilon(1e-15));
  CHECK(stats.min_final == finals.front());
  CHECK(stats.max_final == finals.back());

  std::reverse(records.begin(), records.end());
  const SummaryStats reversed = summarize(records);
  CHECK(reversed.median_final == stats.median_final);
  CHECK(reversed.q25_final == stats.q25_final);
  CHECK(reversed.q75_final == stats.q75_final);
}
