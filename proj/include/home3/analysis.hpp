#pragma once

#include <cstdint>
#include <vector>

#include "home3/record.hpp"

namespace home3 {

// Inclusive index window into a loss array.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

// Ordinary least-squares slope of log(losses[t] - floor) against log(t) over
// the window, the empirical analogue of an O(1/T^a) bound on the optimality
// gap (slope ~ -a). Requires first >= 1, at least 3 points, and every loss in
// the window strictly above the floor (the offending index is named
// otherwise).
double rate_slope(const std::vector<double>& losses, double floor,
                  IndexRange window);

struct IccReport {
  double icc = 0.0;
  double ms_between = 0.0;
  double ms_within = 0.0;
  std::size_t groups = 0;
  std::size_t raters_per_group = 0;
  bool degenerate = false;  // all values identical; icc defined as 1
};

// One-way random-effects ICC(1,1) from the one-way ANOVA decomposition:
//   ICC = (MSB - MSW) / (MSB + (k-1) MSW)
// over a rectangular table of n groups x k measurements, n >= 2, k >= 2.
IccReport icc_oneway(const std::vector<std::vector<double>>& groups);

struct SummaryStats {
  std::size_t run_count = 0;
  double median_final = 0.0;
  double q25_final = 0.0;
  double q75_final = 0.0;
  double min_final = 0.0;
  double max_final = 0.0;
  std::vector<std::size_t> randomizations_per_run;
  std::size_t total_randomizations = 0;
  double median_wall_seconds = 0.0;
  double mean_wall_seconds = 0.0;
};

// Deterministic, permutation-invariant aggregates over a set of runs.
SummaryStats summarize(const std::vector<RunRecord>& records);

// Sorted-data quantile with linear interpolation; q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace home3
