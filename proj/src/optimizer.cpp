#include "home3/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace home3 {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::home3: return "home3";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::momentum_sgd: return "msgd";
    case OptimizerKind::storm: return "storm";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_optimizer(const std::string& name) {
  if (name == "home3") return OptimizerKind::home3;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "msgd" || name == "momentum_sgd") return OptimizerKind::momentum_sgd;
  if (name == "storm") return OptimizerKind::storm;
  return std::nullopt;
}

void HomeConfig::validate() const {
  auto in_unit = [](double b) { return b > 0.0 && b < 1.0; };
  if (!in_unit(beta1) || !in_unit(beta2) || !in_unit(beta3)) {
    throw std::invalid_argument("HomeConfig: decay rates must lie in (0,1)");
  }
  if (!(beta1 < beta3 && beta3 < beta2)) {
    throw std::invalid_argument(
        "HomeConfig: decay ordering beta1 < beta3 < beta2 violated (" +
        std::to_string(beta1) + ", " + std::to_string(beta3) + ", " +
        std::to_string(beta2) + ")");
  }
  if (!(base_lr > 0.0)) throw std::invalid_argument("HomeConfig: base_lr must be > 0");
  if (!(eps1 > 0.0)) throw std::invalid_argument("HomeConfig: eps1 must be > 0");
  if (!(eps2 > 0.0)) throw std::invalid_argument("HomeConfig: eps2 must be > 0");
  if (momentum_power < 1) {
    throw std::invalid_argument("HomeConfig: momentum_power must be >= 1");
  }
  if (!(storm_a > 0.0 && storm_a <= 1.0)) {
    throw std::invalid_argument("HomeConfig: storm_a must lie in (0,1]");
  }
  if (grad_clip_inf < 0.0) {
    throw std::invalid_argument("HomeConfig: grad_clip_inf must be >= 0");
  }
}

HomeConfig disable_third_moment(HomeConfig cfg) {
  cfg.third_moment_disabled = true;
  return cfg;
}

double adaptive_lr(std::uint64_t t, const HomeConfig& cfg) {
  if (t >= cfg.max_iters) {
    throw std::domain_error("adaptive_lr: iteration " + std::to_string(t) +
                            " out of range, run of " +
                            std::to_string(cfg.max_iters) +
                            " iterations already complete");
  }
  return cfg.base_lr *
         (1.0 - static_cast<double>(t) / static_cast<double>(cfg.max_iters));
}

static void require_dims(const DenseVector& x, const DenseVector& g,
                         const MomentState& state) {
  if (x.dim() != g.dim() || x.dim() != state.m.dim()) {
    throw std::invalid_argument("step: dimension mismatch (x " +
                                std::to_string(x.dim()) + ", g " +
                                std::to_string(g.dim()) + ", state " +
                                std::to_string(state.m.dim()) + ")");
  }
  if (x.dim() == 0) throw std::invalid_argument("step: empty parameter vector");
}

static void check_iterate_finite(const DenseVector& x, std::uint64_t iteration) {
  const std::size_t bad = first_non_finite(x.data);
  if (bad != npos) {
    throw numeric_error("non-finite iterate at iteration " +
                            std::to_string(iteration) + ", coordinate " +
                            std::to_string(bad),
                        bad, iteration);
  }
}

StepReport home3_step(const DenseVector& x, const DenseVector& g,
                      MomentState& state, const HomeConfig& cfg,
                      PermutationSource* randomizer) {
  require_dims(x, g, state);
  if (cfg.randomization_enabled && randomizer == nullptr) {
    throw std::invalid_argument("home3_step: randomization enabled but no source");
  }
  const double lr = adaptive_lr(state.t, cfg);
  const std::uint64_t t1 = state.t + 1;
  const std::size_t d = x.dim();

  state.beta1_pow *= cfg.beta1;
  state.beta2_pow *= cfg.beta2;
  state.beta3_pow *= cfg.beta3;
  const double c1 = 1.0 - state.beta1_pow;
  const double c2 = 1.0 - state.beta2_pow;
  const double c3 = 1.0 - state.beta3_pow;

  StepReport rep;
  rep.new_x = DenseVector(d);
  std::vector<double> gap(d);

  for (std::size_t i = 0; i < d; ++i) {
    double gi = g[i];
    if (cfg.grad_clip_inf > 0.0) {
      if (gi > cfg.grad_clip_inf) gi = cfg.grad_clip_inf;
      if (gi < -cfg.grad_clip_inf) gi = -cfg.grad_clip_inf;
    }
    double gp = gi;
    for (int k = 1; k < cfg.momentum_power; ++k) gp *= gi;

    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * gi;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * gi * gi;
    state.s[i] = cfg.third_moment_disabled
                     ? 0.0
                     : cfg.beta3 * state.s[i] + (1.0 - cfg.beta3) * gp;

    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    const double shat = state.s[i] / c3;

    gap[i] = mhat - shat;
    rep.new_x[i] = x[i] - lr * (mhat - shat) / (std::sqrt(vhat) + cfg.eps1);
  }

  rep.grad_norm = norm2(g);
  rep.moment_gap = norm2(gap);

  if (cfg.randomization_enabled && rep.moment_gap < cfg.eps2) {
    rep.new_x = coordinate_randomize(rep.new_x, *randomizer);
    rep.randomized = true;
  }

  state.t = t1;
  check_iterate_finite(rep.new_x, t1);
  std::size_t bad = first_non_finite(state.s.data);
  if (bad == npos) bad = first_non_finite(state.v.data);
  if (bad != npos) {
    throw numeric_error("non-finite moment at iteration " + std::to_string(t1) +
                            ", coordinate " + std::to_string(bad),
                        bad, t1);
  }
  return rep;
}

StepReport adam_step(const DenseVector& x, const DenseVector& g,
                     MomentState& state, const HomeConfig& cfg) {
  require_dims(x, g, state);
  const double lr = adaptive_lr(state.t, cfg);
  const std::uint64_t t1 = state.t + 1;
  const std::size_t d = x.dim();

  state.beta1_pow *= cfg.beta1;
  state.beta2_pow *= cfg.beta2;
  const double c1 = 1.0 - state.beta1_pow;
  const double c2 = 1.0 - state.beta2_pow;

  StepReport rep;
  rep.new_x = DenseVector(d);
  std::vector<double> mhat_all(d);

  for (std::size_t i = 0; i < d; ++i) {
    const double gi = g[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * gi;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * gi * gi;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    mhat_all[i] = mhat;
    rep.new_x[i] = x[i] - lr * mhat / (std::sqrt(vhat) + cfg.eps1);
  }

  rep.grad_norm = norm2(g);
  rep.moment_gap = norm2(mhat_all);  // the HOME gap with S identically zero
  state.t = t1;
  check_iterate_finite(rep.new_x, t1);
  return rep;
}

StepReport momentum_sgd_step(const DenseVector& x, const DenseVector& g,
                             MomentState& state, const HomeConfig& cfg) {
  require_dims(x, g, state);
  const double lr = adaptive_lr(state.t, cfg);
  const std::uint64_t t1 = state.t + 1;

  StepReport rep;
  rep.new_x = DenseVector(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + g[i];
    rep.new_x[i] = x[i] - lr * state.m[i];
  }
  rep.grad_norm = norm2(g);
  rep.moment_gap = norm2(state.m);
  state.t = t1;
  check_iterate_finite(rep.new_x, t1);
  return rep;
}

StepReport storm_step(const DenseVector& x, const DenseVector& g_at_x,
                      const DenseVector& g_prev_at_x, MomentState& state,
                      const HomeConfig& cfg) {
  require_dims(x, g_at_x, state);
  if (g_prev_at_x.dim() != x.dim()) {
    throw std::invalid_argument("storm_step: g_prev_at_x dimension mismatch");
  }
  const double lr = adaptive_lr(state.t, cfg);
  const std::uint64_t t1 = state.t + 1;
  const double keep = 1.0 - cfg.storm_a;

  StepReport rep;
  rep.new_x = DenseVector(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    state.m[i] = g_at_x[i] + keep * (state.m[i] - g_prev_at_x[i]);
    rep.new_x[i] = x[i] - lr * state.m[i];
  }
  rep.grad_norm = norm2(g_at_x);
  rep.moment_gap = norm2(state.m);
  state.t = t1;
  check_iterate_finite(rep.new_x, t1);
  return rep;
}

RunRecord run(Problem& problem, OptimizerKind kind, const HomeConfig& cfg,
              const DenseVector& x0) {
  cfg.validate();
  if (x0.dim() != problem.dim()) {
    throw std::invalid_argument("run: x0 dim " + std::to_string(x0.dim()) +
                                " != problem dim " + std::to_string(problem.dim()));
  }
  const auto started = std::chrono::steady_clock::now();

  PermutationSource randomizer(mix_seed(cfg.seed, 0x9044));
  MomentState state(x0.dim());
  const std::uint64_t T = cfg.max_iters;

  RunRecord rec;
  rec.losses.reserve(T + 1);
  rec.grad_norms.reserve(T + 1);
  rec.moment_gaps.reserve(T + 1);

  DenseVector x = x0;
  DenseVector x_prev = x0;
  rec.losses.push_back(problem.metric(x));
  rec.grad_norms.push_back(0.0);
  rec.moment_gaps.push_back(0.0);

  for (std::uint64_t t = 0; t < T; ++t) {
    problem.begin_iteration(t, cfg.seed, x);
    const DenseVector g = problem.gradient(x);

    StepReport rep;
    switch (kind) {
      case OptimizerKind::home3:
        rep = home3_step(x, g, state, cfg, &randomizer);
        break;
      case OptimizerKind::adam:
        rep = adam_step(x, g, state, cfg);
        break;
      case OptimizerKind::momentum_sgd:
        rep = momentum_sgd_step(x, g, state, cfg);
        break;
      case OptimizerKind::storm: {
        // Previous iterate's gradient under the current sample; zero before
        // the first step (zero-initialized direction).
        const DenseVector g_prev =
            t == 0 ? DenseVector(x.dim()) : problem.gradient(x_prev);
        rep = storm_step(x, g, g_prev, state, cfg);
        break;
      }
    }

    const double loss = problem.metric(rep.new_x);
    if (!std::isfinite(loss)) {
      throw numeric_error("non-finite loss at iteration " + std::to_string(t + 1),
                          0, t + 1);
    }
    rec.losses.push_back(loss);
    rec.grad_norms.push_back(rep.grad_norm);
    rec.moment_gaps.push_back(rep.moment_gap);
    if (rep.randomized) rec.randomization_events.push_back(t + 1);

    x_prev = x;
    x = rep.new_x;
  }

  rec.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return rec;
}

}  // namespace home3
