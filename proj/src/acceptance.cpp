#include "home3/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "home3/analysis.hpp"
#include "home3/data.hpp"
#include "home3/experiment.hpp"
#include "home3/problems.hpp"
#include "home3/random.hpp"
#include "home3/trace.hpp"

namespace home3 {
namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

HomeConfig default_config(std::uint64_t iters) {
  HomeConfig cfg;
  cfg.max_iters = iters;
  return cfg;
}

DenseVector seeded_uniform(std::size_t dim, double half_width, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xacce));
  DenseVector x(dim);
  for (double& v : x.data) v = rng.next_uniform(-half_width, half_width);
  return x;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

// ---------------------------------------------------------------------------
// Criterion 1: Adam reduction
// ---------------------------------------------------------------------------

// From-scratch Adam on f(x) = 0.5||x||^2; plain arrays, no optimizer-module
// calls, so it stays an independent reference for the reduction check.
std::vector<std::vector<double>> adam_reference_trajectory(
    std::vector<double> x, const HomeConfig& c) {
  const std::size_t d = x.size();
  std::vector<double> m(d, 0.0), v(d, 0.0);
  double b1p = 1.0, b2p = 1.0;
  std::vector<std::vector<double>> traj;
  traj.reserve(c.max_iters);
  for (std::uint64_t t = 0; t < c.max_iters; ++t) {
    const double lr =
        c.base_lr * (1.0 - static_cast<double>(t) / static_cast<double>(c.max_iters));
    b1p *= c.beta1;
    b2p *= c.beta2;
    for (std::size_t i = 0; i < d; ++i) {
      const double g = x[i];  // gradient of the quadratic
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double mhat = m[i] / (1.0 - b1p);
      const double vhat = v[i] / (1.0 - b2p);
      x[i] = x[i] - lr * mhat / (std::sqrt(vhat) + c.eps1);
    }
    traj.push_back(x);
  }
  return traj;
}

}  // namespace

double adam_reduction_divergence(const HomeConfig& home_cfg,
                                 const HomeConfig& oracle_cfg, std::size_t dim,
                                 const std::vector<std::uint64_t>& seeds) {
  QuadraticProblem quad(dim);
  const HomeConfig reduced = disable_third_moment(home_cfg);
  double worst = 0.0;
  for (std::uint64_t seed : seeds) {
    const DenseVector x0 = seeded_uniform(dim, 0.5, seed);

    DenseVector x = x0;
    MomentState state(dim);
    std::vector<std::vector<double>> home_traj;
    home_traj.reserve(reduced.max_iters);
    for (std::uint64_t t = 0; t < reduced.max_iters; ++t) {
      const DenseVector g = quad.gradient(x);
      x = home3_step(x, g, state, reduced, nullptr).new_x;
      home_traj.push_back(x.data);
    }

    const auto oracle_traj = adam_reference_trajectory(x0.data, oracle_cfg);
    for (std::size_t t = 0; t < home_traj.size(); ++t) {
      for (std::size_t i = 0; i < dim; ++i) {
        worst = std::max(worst, std::abs(home_traj[t][i] - oracle_traj[t][i]));
      }
    }
  }
  return worst;
}

namespace {

CriterionResult criterion_1_adam_reduction() {
  Stopwatch sw;
  const HomeConfig cfg = default_config(1000);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
  const double worst = adam_reduction_divergence(cfg, cfg, 16, seeds);

  CriterionResult r;
  r.id = 1;
  r.name = "adam-reduction oracle (quadratic D=16, 10 seeds, T=1000)";
  r.seconds = sw.seconds();
  r.passed = worst <= 1e-12 && r.seconds < 5.0;
  r.detail = "max per-coordinate divergence " + fmt(worst);
  return r;
}

CriterionResult criterion_2_hand_trace() {
  Stopwatch sw;
  HomeConfig cfg = default_config(100);
  MomentState state(1);
  const DenseVector x{1.0};
  const DenseVector g{0.5};
  const StepReport rep = home3_step(x, g, state, cfg, nullptr);

  const double mhat = state.m[0] / (1.0 - state.beta1_pow);
  const double vhat = state.v[0] / (1.0 - state.beta2_pow);
  const double shat = state.s[0] / (1.0 - state.beta3_pow);
  const double step = x[0] - rep.new_x[0];
  const double expected_step = 0.001 * (0.5 - 0.125) / (std::sqrt(0.25) + 1e-8);

  const double err =
      std::max({std::abs(mhat - 0.5), std::abs(vhat - 0.25), std::abs(shat - 0.125),
                std::abs(step - expected_step)});

  CriterionResult r;
  r.id = 2;
  r.name = "one-step hand trace (g=0.5 from zero state)";
  r.seconds = sw.seconds();
  r.passed = err <= 1e-12 && r.seconds < 1.0;
  r.detail = "M^=" + fmt(mhat) + " V^=" + fmt(vhat) + " S^=" + fmt(shat) +
             " step=" + fmt(step) + " max err " + fmt(err);
  return r;
}

CriterionResult criterion_3_norm_preservation() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 3;
  r.name = "coordinate randomization preserves multiset and norm";

  double worst_rel = 0.0;
  bool multiset_ok = true;
  for (std::size_t dim : {std::size_t{1}, std::size_t{8}, std::size_t{64}}) {
    PermutationSource src(0x5eed + dim);
    for (int trial = 0; trial < 1000; ++trial) {
      DenseVector x(dim);
      for (double& v : x.data) v = src.rng().next_uniform(-10.0, 10.0);
      if (norm2(x) == 0.0) continue;
      const DenseVector y = coordinate_randomize(x, src);

      std::vector<double> sx = x.data, sy = y.data;
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      multiset_ok = multiset_ok && sx == sy;

      worst_rel = std::max(worst_rel, std::abs(norm2(y) / norm2(x) - 1.0));
    }
  }

  double worst_opnorm = 0.0;
  for (std::size_t dim : {std::size_t{1}, std::size_t{8}, std::size_t{64}}) {
    PermutationSource src(0xa11 + dim);
    const double est = operator_norm_estimate(src, dim, 1000);
    worst_opnorm = std::max(worst_opnorm, std::abs(est - 1.0));
  }

  r.seconds = sw.seconds();
  r.passed = multiset_ok && worst_rel <= 1e-15 && worst_opnorm <= 1e-15 &&
             r.seconds < 2.0;
  r.detail = std::string("multiset ") + (multiset_ok ? "exact" : "BROKEN") +
             ", worst norm ratio err " + fmt(worst_rel) + ", worst |"
             "op-norm - 1| " + fmt(worst_opnorm);
  return r;
}

CriterionResult criterion_4_trigger() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 4;
  r.name = "stationarity trigger randomizes the iterate";

  // Zero gradient from zero state: the moment gap is exactly 0 < eps2.
  HomeConfig cfg = default_config(100);
  cfg.randomization_enabled = true;
  PermutationSource src(7);
  DenseVector x{3.0, -1.0, 4.0, -1.5, 9.0, -2.0, 6.0, -5.0};
  MomentState state(8);
  const StepReport zero_grad = home3_step(x, DenseVector(8), state, cfg, &src);

  std::vector<double> sx = x.data, sy = zero_grad.new_x.data;
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  const bool zero_ok = zero_grad.randomized && sx == sy;

  // Forced trigger: a huge eps2 puts any gap below threshold; the output must
  // be a permutation of the iterate the update alone would have produced.
  HomeConfig wide = cfg;
  wide.eps2 = 1e9;
  DenseVector g{0.5, -0.25, 0.75, 0.1, -0.6, 0.33, -0.9, 0.05};
  MomentState st_plain(8), st_rand(8);
  HomeConfig plain = wide;
  plain.randomization_enabled = false;
  const StepReport before = home3_step(x, g, st_plain, plain, nullptr);
  PermutationSource src2(11);
  const StepReport after = home3_step(x, g, st_rand, wide, &src2);

  std::vector<double> sb = before.new_x.data, sa = after.new_x.data;
  std::sort(sb.begin(), sb.end());
  std::sort(sa.begin(), sa.end());
  const bool forced_ok = after.randomized && !before.randomized && sb == sa;

  r.seconds = sw.seconds();
  r.passed = zero_ok && forced_ok && r.seconds < 1.0;
  r.detail = std::string("zero-gradient trigger ") + (zero_ok ? "ok" : "BROKEN") +
             ", forced trigger " + (forced_ok ? "ok" : "BROKEN");
  return r;
}

double fd_relative_error(Problem& p, const DenseVector& at, double h) {
  const DenseVector analytic = p.gradient(at);
  DenseVector fd(at.dim());
  DenseVector probe = at;
  for (std::size_t i = 0; i < at.dim(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = p.value(probe);
    probe[i] = orig - h;
    const double down = p.value(probe);
    probe[i] = orig;
    fd[i] = (up - down) / (2.0 * h);
  }
  std::vector<double> diff(at.dim());
  for (std::size_t i = 0; i < at.dim(); ++i) diff[i] = analytic[i] - fd[i];
  const double denom = std::max(norm2(fd), 1e-12);
  return norm2(diff) / denom;
}

// Random point with entries bounded away from the ReLU/L1 kinks.
DenseVector smooth_point(std::size_t dim, Rng& rng) {
  DenseVector x(dim);
  for (double& v : x.data) {
    const double mag = rng.next_uniform(0.2, 1.2);
    v = rng.next_unit() < 0.5 ? -mag : mag;
  }
  return x;
}

CriterionResult criterion_5_gradients() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 5;
  r.name = "closed-form gradients match central differences";

  const double h = 1e-6;
  double worst = 0.0;
  std::string worst_name = "-";
  Rng rng(0xfd);

  auto check = [&](Problem& p, const char* label) {
    for (int pt = 0; pt < 20; ++pt) {
      const DenseVector at = smooth_point(p.dim(), rng);
      const double err = fd_relative_error(p, at, h);
      if (err > worst) {
        worst = err;
        worst_name = label;
      }
    }
  };

  QuadraticProblem quad(12);
  check(quad, "quadratic");

  {
    DictLearnProblem p;
    p.input = synth_lowrank(20, 30, 4, 21).matrix;
    p.lambda = 0.1;
    p.dict_rank = 4;
    DictLearnObjective obj(std::move(p));
    check(obj, "dictlearn");
  }
  {
    DnmfProblem p;
    p.input = synth_lowrank(20, 24, 3, 22).matrix;
    p.layer_dims = {6, 4};
    p.penalty_mu = 1.0;
    DnmfObjective obj(std::move(p));
    check(obj, "dnmf");
  }
  {
    DnmfProblem p;
    p.input = synth_lowrank(20, 24, 3, 23).matrix;
    p.layer_dims = {6, 4};
    p.noise_amplitude = 0.1;
    DnmfObjective obj(std::move(p));
    // Freeze one iteration's noise; the objective is then deterministic and
    // the analytic gradient must match differences through the same noise.
    obj.begin_iteration(0, 77, smooth_point(obj.dim(), rng));
    check(obj, "dnmf_noisy");
  }
  {
    ProblemSpec spec;
    spec.family = "logreg";
    spec.rows = 80;
    spec.cols = 10;
    spec.l2_reg = 1e-2;
    auto obj = make_problem(spec);
    check(*obj, "logreg");
  }

  r.seconds = sw.seconds();
  r.passed = worst <= 1e-5 && r.seconds < 10.0;
  r.detail = "worst relative error " + fmt(worst) + " (" + worst_name + ")";
  return r;
}

struct QuadRun {
  std::vector<double> losses;    // length T+1
  std::vector<double> grad_inf;  // ||g||inf at iterate t, length T
};

QuadRun home3_quadratic_run(const DenseVector& x0, const HomeConfig& cfg) {
  QuadraticProblem quad(x0.dim());
  QuadRun out;
  out.losses.push_back(quad.value(x0));
  DenseVector x = x0;
  MomentState state(x0.dim());
  for (std::uint64_t t = 0; t < cfg.max_iters; ++t) {
    const DenseVector g = quad.gradient(x);
    out.grad_inf.push_back(norm_inf(g));
    x = home3_step(x, g, state, cfg, nullptr).new_x;
    out.losses.push_back(quad.value(x));
  }
  return out;
}

CriterionResult criterion_6_rate_trend() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 6;
  r.name = "convex rate trend (small-gradient slope <= -0.4)";

  const HomeConfig cfg = default_config(500);

  // Small-gradient regime: coordinates at magnitude 0.25 keep ||g||inf < 1
  // for the whole run (the quadratic contracts toward 0).
  DenseVector x0(16);
  for (std::size_t i = 0; i < x0.dim(); ++i) x0[i] = i % 2 == 0 ? 0.25 : -0.25;
  const QuadRun small = home3_quadratic_run(x0, cfg);
  const double slope_small = rate_slope(small.losses, 0.0, {10, 500});
  double max_inf = 0.0;
  for (double v : small.grad_inf) max_inf = std::max(max_inf, v);
  const bool bounded = max_inf < 1.0;

  // Large-gradient regime: recorded, not asserted. The early phase is the
  // first half of the iterations with ||g||inf > 1.
  DenseVector big0(16);
  for (std::size_t i = 0; i < big0.dim(); ++i) big0[i] = i % 2 == 0 ? 3.0 : -3.0;
  const QuadRun big = home3_quadratic_run(big0, cfg);
  std::size_t over = 0;
  for (double v : big.grad_inf) {
    if (v > 1.0) ++over;
  }
  const std::size_t early_last =
      std::min<std::size_t>(big.losses.size() - 1, std::max<std::size_t>(3, over / 2));
  const double slope_large = rate_slope(big.losses, 0.0, {1, early_last});

  r.seconds = sw.seconds();
  r.passed = bounded && slope_small <= -0.4 && r.seconds < 30.0;
  r.detail = "small-gradient slope " + fmt(slope_small) + " (max ||g||inf " +
             fmt(max_inf) + "); large-gradient early slope over [1," +
             std::to_string(early_last) + "] " + fmt(slope_large) +
             " reported unasserted";
  return r;
}

CriterionResult criterion_7_dictlearn_ordering() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 7;
  r.name = "dictionary learning: home3 median within 1.05x adam";

  ProblemSpec spec;
  spec.family = "dictlearn";
  spec.rows = 40;
  spec.cols = 60;
  spec.rank = 5;
  spec.dict_rank = 5;
  spec.lambda = 0.1;
  spec.data_seed = 42;

  HomeConfig cfg = default_config(100);

  std::vector<double> home_finals, adam_finals, initials;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const OptimizerKind kind : {OptimizerKind::home3, OptimizerKind::adam}) {
      auto problem = make_problem(spec);
      HomeConfig oc = cfg;
      oc.seed = seed;
      const DenseVector x0 = initial_point(spec, problem->dim(), seed);
      const RunRecord rec = run(*problem, kind, oc, x0);
      if (kind == OptimizerKind::home3) {
        home_finals.push_back(rec.losses.back());
        initials.push_back(rec.losses.front());
      } else {
        adam_finals.push_back(rec.losses.back());
      }
    }
  }

  const double med_home = median_of(home_finals);
  const double med_adam = median_of(adam_finals);
  const double med_init = median_of(initials);

  r.seconds = sw.seconds();
  r.passed = med_home <= 1.05 * med_adam && med_home < med_init &&
             med_adam < med_init && r.seconds < 60.0;
  r.detail = "median final: home3 " + fmt(med_home) + ", adam " + fmt(med_adam) +
             ", initial " + fmt(med_init);
  return r;
}

CriterionResult criterion_8_randomization_preserves() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 8;
  r.name = "forced randomization keeps final loss within 2x";

  const HomeConfig cfg = default_config(500);
  QuadraticProblem quad(16);

  std::vector<double> plain_finals, forced_finals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseVector x0 = seeded_uniform(16, 0.5, seed + 1000);

    DenseVector x = x0;
    MomentState st(16);
    for (std::uint64_t t = 0; t < cfg.max_iters; ++t) {
      x = home3_step(x, quad.gradient(x), st, cfg, nullptr).new_x;
    }
    plain_finals.push_back(quad.value(x));

    x = x0;
    MomentState st2(16);
    PermutationSource src(mix_seed(seed, 0xf0ced));
    for (std::uint64_t t = 0; t < cfg.max_iters; ++t) {
      x = home3_step(x, quad.gradient(x), st2, cfg, nullptr).new_x;
      if ((t + 1) % 25 == 0) x = coordinate_randomize(x, src);
    }
    forced_finals.push_back(quad.value(x));
  }

  const double med_plain = median_of(plain_finals);
  const double med_forced = median_of(forced_finals);

  r.seconds = sw.seconds();
  r.passed = med_forced <= 2.0 * med_plain && r.seconds < 10.0;
  r.detail = "median final: unrandomized " + fmt(med_plain) +
             ", randomized every 25 iters " + fmt(med_forced);
  return r;
}

CriterionResult criterion_9_noise_bound() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 9;
  r.name = "noise bound: 1e6 samples inside [-1, 1] at median 10";

  DenseMatrix y(1000, 1000, 10.0);  // median 10 -> bound [-1, 1]
  Rng rng(0x6e);
  const DenseMatrix noisy = inject_noise(y, rng);

  double lo = 1e300, hi = -1e300;
  bool inside = true;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double u = noisy.data[i] - 10.0;
    inside = inside && u >= -1.0 && u <= 1.0;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }

  r.seconds = sw.seconds();
  r.passed = inside && lo <= -0.99 && hi >= 0.99 && r.seconds < 5.0;
  r.detail = "empirical range [" + fmt(lo) + ", " + fmt(hi) + "]";
  return r;
}

CriterionResult criterion_10_icc_oracle() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 10;
  r.name = "ICC(1,1) matches ANOVA sums-of-squares oracle";

  Rng rng(0x1cc);
  double worst = 0.0;
  for (int table = 0; table < 100; ++table) {
    std::vector<std::vector<double>> groups(5, std::vector<double>(3));
    for (auto& g : groups)
      for (double& v : g) v = rng.next_uniform(-5.0, 5.0);

    const IccReport rep = icc_oneway(groups);

    // Oracle: direct two-pass sums of squares.
    const std::size_t n = 5, k = 3;
    double grand = 0.0;
    for (const auto& g : groups)
      for (double v : g) grand += v;
    grand /= static_cast<double>(n * k);
    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
      double gm = 0.0;
      for (double v : g) gm += v;
      gm /= static_cast<double>(k);
      ssb += static_cast<double>(k) * (gm - grand) * (gm - grand);
      for (double v : g) ssw += (v - gm) * (v - gm);
    }
    const double msb = ssb / static_cast<double>(n - 1);
    const double msw = ssw / static_cast<double>(n * (k - 1));
    const double icc_oracle =
        (msb - msw) / (msb + static_cast<double>(k - 1) * msw);
    worst = std::max(worst, std::abs(rep.icc - icc_oracle));
  }

  const IccReport perfect = icc_oneway({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}});

  r.seconds = sw.seconds();
  r.passed = worst <= 1e-10 && perfect.icc == 1.0 && r.seconds < 2.0;
  r.detail = "worst |icc - oracle| " + fmt(worst) + ", perfect table icc " +
             fmt(perfect.icc);
  return r;
}

CriterionResult criterion_11_rate_exactness() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 11;
  r.name = "rate estimator recovers power-law slopes to 1e-6";

  double worst = 0.0;
  for (const double exponent : {-1.0, -5.0 / 6.0, -0.5}) {
    std::vector<double> losses(601);
    losses[0] = 10.0;  // index 0 unused by the window
    for (std::size_t t = 1; t <= 600; ++t)
      losses[t] = std::pow(static_cast<double>(t), exponent);
    const double slope = rate_slope(losses, 0.0, {1, 600});
    worst = std::max(worst, std::abs(slope - exponent));
  }

  r.seconds = sw.seconds();
  r.passed = worst <= 1e-6 && r.seconds < 1.0;
  r.detail = "worst |slope - exponent| " + fmt(worst);
  return r;
}

CriterionResult criterion_12_determinism() {
  Stopwatch sw;
  CriterionResult r;
  r.id = 12;
  r.name = "identical configs emit byte-identical traces";

  ExperimentConfig cfg;
  cfg.problem.family = "quadratic";
  cfg.problem.dim = 8;
  cfg.optimizers = {"home3", "adam"};
  cfg.seeds = {0, 1};
  cfg.opt.max_iters = 50;

  const auto base = std::filesystem::temp_directory_path() / "home3_acceptance";
  std::filesystem::remove_all(base);
  cfg.output_dir = base / "a";
  std::ostringstream devnull;
  run_experiment(cfg, devnull);
  cfg.output_dir = base / "b";
  run_experiment(cfg, devnull);

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  bool identical = true;
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(base / "a")) {
    const auto other = base / "b" / entry.path().filename();
    identical = identical && std::filesystem::exists(other) &&
                slurp(entry.path()) == slurp(other);
    ++compared;
  }
  std::filesystem::remove_all(base);

  r.seconds = sw.seconds();
  r.passed = identical && compared == 5 && r.seconds < 10.0;  // 4 traces + summary
  r.detail = std::to_string(compared) + " files compared, " +
             (identical ? "all identical" : "MISMATCH");
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& log) {
  std::vector<CriterionResult> results;
  results.push_back(criterion_1_adam_reduction());
  results.push_back(criterion_2_hand_trace());
  results.push_back(criterion_3_norm_preservation());
  results.push_back(criterion_4_trigger());
  results.push_back(criterion_5_gradients());
  results.push_back(criterion_6_rate_trend());
  results.push_back(criterion_7_dictlearn_ordering());
  results.push_back(criterion_8_randomization_preserves());
  results.push_back(criterion_9_noise_bound());
  results.push_back(criterion_10_icc_oracle());
  results.push_back(criterion_11_rate_exactness());
  results.push_back(criterion_12_determinism());

  for (const CriterionResult& r : results) {
    log << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " - "
        << r.detail << " (" << fmt(r.seconds) << " s)\n";
  }
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace home3
