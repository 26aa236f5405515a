#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "home3/problem.hpp"
#include "home3/random.hpp"
#include "home3/record.hpp"
#include "home3/tensor.hpp"

namespace home3 {

enum class OptimizerKind { home3, adam, momentum_sgd, storm };

std::string to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(const std::string& name);

// Shared configuration for the HOME family and the baselines.
//
// The step size follows the adaptive schedule base_lr * (1 - t/T). The decay
// rates must keep the ordering beta1 < beta3 < beta2. momentum_power selects
// the order of the high-power channel (3 for HOME-3; odd powers only make
// sense but the knob is generic). grad_clip_inf > 0 clips the gradient in
// infinity norm before the moments are formed; it exists for ablations and is
// off by default.
struct HomeConfig {
  double base_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double beta3 = 0.99;
  double eps1 = 1e-8;
  double eps2 = 1e-8;
  std::uint64_t max_iters = 100;
  bool randomization_enabled = false;
  std::uint64_t seed = 0;
  int momentum_power = 3;
  double storm_a = 0.1;
  double grad_clip_inf = 0.0;  // 0 disables clipping
  bool third_moment_disabled = false;

  void validate() const;
};

// Returns cfg with the high-power channel forced to stay identically zero, so
// the update reduces to x - lr * M^ / (sqrt(V^) + eps1), i.e. Adam.
HomeConfig disable_third_moment(HomeConfig cfg);

// EMA state of one run. m/v/s hold the first, second and third moment
// accumulators, all zero at t = 0; beta powers are carried as running
// products so bias correction divides by 1 - beta^t without calling pow.
// The STORM baseline reuses m for its recursive direction d.
struct MomentState {
  std::uint64_t t = 0;
  DenseVector m;
  DenseVector v;
  DenseVector s;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  double beta3_pow = 1.0;

  explicit MomentState(std::size_t dim) : m(dim), v(dim), s(dim) {}
};

struct StepReport {
  DenseVector new_x;
  double grad_norm = 0.0;
  double moment_gap = 0.0;
  bool randomized = false;
};

// base_lr * (1 - t/T); strictly positive for t < T, error once the run is
// complete (t >= T).
double adaptive_lr(std::uint64_t t, const HomeConfig& cfg);

// One HOME step: update the three moment EMAs, form the bias-corrected views,
// move x along -(M^ - S^) / (sqrt(V^) + eps1), and permute the new iterate
// when ||M^ - S^|| drops below eps2 and randomization is enabled. Moment
// state is carried across a randomization event unchanged. `randomizer` may
// be null only when randomization is disabled.
StepReport home3_step(const DenseVector& x, const DenseVector& g,
                      MomentState& state, const HomeConfig& cfg,
                      PermutationSource* randomizer = nullptr);

// Adam with bias correction on the same schedule and epsilons.
StepReport adam_step(const DenseVector& x, const DenseVector& g,
                     MomentState& state, const HomeConfig& cfg);

// Heavy-ball: m <- beta1 * m + g; x <- x - lr * m.
StepReport momentum_sgd_step(const DenseVector& x, const DenseVector& g,
                             MomentState& state, const HomeConfig& cfg);

// Recursive-momentum direction d <- g + (1-a)(d_prev - g_prev_at_x), where
// g_prev_at_x is the previous iterate's gradient under the current sample
// (for deterministic problems, simply the previous iterate's gradient).
StepReport storm_step(const DenseVector& x, const DenseVector& g_at_x,
                      const DenseVector& g_prev_at_x, MomentState& state,
                      const HomeConfig& cfg);

// Runs exactly cfg.max_iters steps of the chosen optimizer from x0 and
// records loss / gradient norm / moment gap / randomization events per
// iteration. Deterministic given (cfg, x0, seed). Non-finite values abort
// with a numeric_error carrying the iteration and coordinate.
RunRecord run(Problem& problem, OptimizerKind kind, const HomeConfig& cfg,
              const DenseVector& x0);

}  // namespace home3
