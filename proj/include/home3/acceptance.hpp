#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "home3/optimizer.hpp"

namespace home3 {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs every acceptance criterion, printing one pass/fail line each.
std::vector<CriterionResult> run_acceptance(std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

// Maximum per-coordinate divergence between a HOME-3 trajectory with the
// third moment disabled (stepping under home_cfg) and a from-scratch Adam
// reference stepping under oracle_cfg, over the quadratic problem. Exposed so
// tests can verify the check detects tampered decay rates.
double adam_reduction_divergence(const HomeConfig& home_cfg,
                                 const HomeConfig& oracle_cfg, std::size_t dim,
                                 const std::vector<std::uint64_t>& seeds);

}  // namespace home3
