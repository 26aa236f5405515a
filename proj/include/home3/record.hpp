#pragma once

#include <cstdint>
#include <vector>

namespace home3 {

// Per-iteration trace of one optimizer run. Arrays have length T+1; row 0 is
// the initial point (grad_norm and moment_gap 0 by convention, nothing has
// happened yet), row t >= 1 describes step t: the loss at the new iterate, the
// norm of the gradient the step consumed, the moment gap after the update and
// whether the randomization trigger fired.
struct RunRecord {
  std::vector<double> losses;
  std::vector<double> grad_norms;
  std::vector<double> moment_gaps;
  std::vector<std::uint64_t> randomization_events;  // iteration indices, ascending
  double wall_time_seconds = 0.0;

  std::size_t iterations() const { return losses.empty() ? 0 : losses.size() - 1; }

  bool randomized_at(std::uint64_t iter) const {
    for (std::uint64_t e : randomization_events)
      if (e == iter) return true;
    return false;
  }

  bool same_trace(const RunRecord& other) const {
    return losses == other.losses && grad_norms == other.grad_norms &&
           moment_gaps == other.moment_gaps &&
           randomization_events == other.randomization_events;
  }
};

}  // namespace home3
