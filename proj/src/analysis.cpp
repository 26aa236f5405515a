#include "home3/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace home3 {

double rate_slope(const std::vector<double>& losses, double floor,
                  IndexRange window) {
  if (window.first < 1) {
    throw std::invalid_argument("rate_slope: window must start at index >= 1");
  }
  if (window.last >= losses.size()) {
    throw std::invalid_argument("rate_slope: window end " +
                                std::to_string(window.last) +
                                " out of range (have " +
                                std::to_string(losses.size()) + " entries)");
  }
  if (window.last < window.first + 2) {
    throw std::invalid_argument("rate_slope: window needs at least 3 points");
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(window.last - window.first + 1);
  for (std::size_t t = window.first; t <= window.last; ++t) {
    const double gap = losses[t] - floor;
    if (!(gap > 0.0)) {
      throw std::invalid_argument("rate_slope: loss at index " + std::to_string(t) +
                                  " is not above the floor");
    }
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = sxx - sx * sx / n;
  if (denom == 0.0) throw std::invalid_argument("rate_slope: degenerate window");
  return (sxy - sx * sy / n) / denom;
}

IccReport icc_oneway(const std::vector<std::vector<double>>& groups) {
  const std::size_t n = groups.size();
  if (n < 2) throw std::invalid_argument("icc_oneway: need at least 2 groups");
  const std::size_t k = groups[0].size();
  if (k < 2) throw std::invalid_argument("icc_oneway: need at least 2 raters per group");
  for (const auto& g : groups) {
    if (g.size() != k) {
      throw std::invalid_argument("icc_oneway: ragged table (expected " +
                                  std::to_string(k) + " raters per group)");
    }
  }

  double grand = 0.0;
  for (const auto& g : groups)
    for (double v : g) grand += v;
  grand /= static_cast<double>(n * k);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(k);
    ssb += static_cast<double>(k) * (mean - grand) * (mean - grand);
    for (double v : g) ssw += (v - mean) * (v - mean);
  }

  IccReport rep;
  rep.groups = n;
  rep.raters_per_group = k;
  rep.ms_between = ssb / static_cast<double>(n - 1);
  rep.ms_within = ssw / static_cast<double>(n * (k - 1));

  const double denom = rep.ms_between + static_cast<double>(k - 1) * rep.ms_within;
  if (denom == 0.0) {
    // all values identical
    rep.icc = 1.0;
    rep.degenerate = true;
  } else {
    rep.icc = (rep.ms_between - rep.ms_within) / denom;
  }
  return rep;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty data");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SummaryStats summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");

  SummaryStats s;
  s.run_count = records.size();

  std::vector<double> finals, walls;
  finals.reserve(records.size());
  walls.reserve(records.size());
  for (const RunRecord& r : records) {
    if (r.losses.empty()) throw std::invalid_argument("summarize: empty record");
    finals.push_back(r.losses.back());
    walls.push_back(r.wall_time_seconds);
    s.randomizations_per_run.push_back(r.randomization_events.size());
    s.total_randomizations += r.randomization_events.size();
  }
  std::sort(finals.begin(), finals.end());
  std::sort(walls.begin(), walls.end());
  std::sort(s.randomizations_per_run.begin(), s.randomizations_per_run.end());

  s.median_final = quantile_sorted(finals, 0.5);
  s.q25_final = quantile_sorted(finals, 0.25);
  s.q75_final = quantile_sorted(finals, 0.75);
  s.min_final = finals.front();
  s.max_final = finals.back();
  s.median_wall_seconds = quantile_sorted(walls, 0.5);
  double mean = 0.0;
  for (double w : walls) mean += w;
  s.mean_wall_seconds = mean / static_cast<double>(walls.size());
  return s;
}

}  // namespace home3
