#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "home3/acceptance.hpp"
#include "home3/optimizer.hpp"
#include "home3/problem.hpp"

using namespace home3;

namespace {

std::int64_t ulps_between(double a, double b) {
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, 8);
  std::memcpy(&ib, &b, 8);
  if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
  if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
  return std::abs(ia - ib);
}

HomeConfig config_with_iters(std::uint64_t iters) {
  HomeConfig cfg;
  cfg.max_iters = iters;
  return cfg;
}

}  // namespace

TEST_CASE("adaptive_lr follows the linear decay schedule") {
  const HomeConfig cfg = config_with_iters(100);
  CHECK(adaptive_lr(0, cfg) == 0.001);
  CHECK(adaptive_lr(50, cfg) == doctest::Approx(0.0005).epsilon(1e-12));
  CHECK(adaptive_lr(99, cfg) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK_THROWS_AS(adaptive_lr(100, cfg), std::domain_error);
}

TEST_CASE("config validation enforces the decay ordering") {
  HomeConfig cfg;
  cfg.validate();  // defaults are legal

  HomeConfig bad = cfg;
  bad.beta3 = 0.8;  // below beta1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.beta3 = 0.9999;  // above beta2
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.base_lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("bias-corrected moments at t=1 equal g, g^2, g^3 to rounding") {
  // The quotient ((1-b)x)/(1-b) can land 1 ulp off x in IEEE double, and the
  // squared/cubed channels carry one more product rounding, so 1 and 2 ulps
  // are the attainable bounds for the canonical update formula.
  Rng rng(0xb1a5);
  for (int trial = 0; trial < 2000; ++trial) {
    HomeConfig cfg = config_with_iters(10);
    cfg.beta1 = rng.next_uniform(0.01, 0.97);
    cfg.beta3 = rng.next_uniform(cfg.beta1 + 0.001, 0.985);
    cfg.beta2 = rng.next_uniform(cfg.beta3 + 0.001, 0.999);
    const double g = rng.next_uniform(-10.0, 10.0);

    MomentState st(1);
    home3_step(DenseVector{1.0}, DenseVector{g}, st, cfg, nullptr);

    const double mhat = st.m[0] / (1.0 - st.beta1_pow);
    const double vhat = st.v[0] / (1.0 - st.beta2_pow);
    const double shat = st.s[0] / (1.0 - st.beta3_pow);
    CHECK(ulps_between(mhat, g) <= 1);
    CHECK(ulps_between(vhat, g * g) <= 2);
    CHECK(ulps_between(shat, g * g * g) <= 2);
  }
}

TEST_CASE("single-step hand trace from zero state") {
  HomeConfig cfg = config_with_iters(100);
  MomentState st(1);
  const StepReport rep = home3_step(DenseVector{1.0}, DenseVector{0.5}, st, cfg,
                                    nullptr);

  const double mhat = st.m[0] / (1.0 - st.beta1_pow);
  const double vhat = st.v[0] / (1.0 - st.beta2_pow);
  const double shat = st.s[0] / (1.0 - st.beta3_pow);
  CHECK(std::abs(mhat - 0.5) <= 1e-12);
  CHECK(std::abs(vhat - 0.25) <= 1e-12);
  CHECK(std::abs(shat - 0.125) <= 1e-12);

  const double expected_step = 0.001 * (0.5 - 0.125) / (std::sqrt(0.25) + 1e-8);
  CHECK(std::abs((1.0 - rep.new_x[0]) - expected_step) <= 1e-12);
  CHECK(rep.new_x[0] == doctest::Approx(0.99925).epsilon(1e-6));
  CHECK(!rep.randomized);
  CHECK(st.t == 1);
}

TEST_CASE("zero gradient from zero state trips the randomization trigger") {
  HomeConfig cfg = config_with_iters(10);
  cfg.randomization_enabled = true;
  PermutationSource src(5);
  MomentState st(1);
  const StepReport rep =
      home3_step(DenseVector{2.5}, DenseVector{0.0}, st, cfg, &src);
  CHECK(rep.randomized);
  CHECK(rep.moment_gap == 0.0);
  CHECK(rep.new_x[0] == 2.5);  // a scalar permutation is the identity
}

TEST_CASE("trigger fires iff gap below eps2 and randomization enabled") {
  PermutationSource src(6);
  const DenseVector x{1.0, 2.0, 3.0};
  const DenseVector g{0.4, -0.2, 0.3};

  HomeConfig wide = config_with_iters(10);
  wide.eps2 = 1e9;
  wide.randomization_enabled = true;
  MomentState st1(3);
  CHECK(home3_step(x, g, st1, wide, &src).randomized);

  HomeConfig disabled = wide;
  disabled.randomization_enabled = false;
  MomentState st2(3);
  CHECK(!home3_step(x, g, st2, disabled, nullptr).randomized);

  HomeConfig narrow = config_with_iters(10);
  narrow.eps2 = 1e-300;
  narrow.randomization_enabled = true;
  MomentState st3(3);
  CHECK(!home3_step(x, g, st3, narrow, &src).randomized);
}

TEST_CASE("disable_third_moment zeroes the S channel and matches adam_step") {
  HomeConfig cfg = disable_third_moment(config_with_iters(200));
  Rng rng(0xda);

  MomentState home_st(4), adam_st(4);
  DenseVector xh{1.0, -2.0, 0.5, 3.0};
  DenseVector xa = xh;
  for (int t = 0; t < 200; ++t) {
    DenseVector g(4);
    for (double& v : g.data) v = rng.next_uniform(-3.0, 3.0);

    const StepReport hr = home3_step(xh, g, home_st, cfg, nullptr);
    const StepReport ar = adam_step(xa, g, adam_st, cfg);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(home_st.s[i] == 0.0);
      CHECK(std::abs(hr.new_x[i] - ar.new_x[i]) <= 1e-12);
    }
    // With S == 0 the gap is the norm of the bias-corrected first moment.
    CHECK(hr.moment_gap == doctest::Approx(ar.moment_gap).epsilon(1e-15));
    xh = hr.new_x;
    xa = ar.new_x;
  }
}

TEST_CASE("adam hand values at t=1") {
  HomeConfig cfg = config_with_iters(100);
  MomentState st(1);
  const StepReport rep = adam_step(DenseVector{1.0}, DenseVector{0.5}, st, cfg);
  // step = lr * 0.5 / (0.5 + 1e-8), essentially lr
  CHECK(1.0 - rep.new_x[0] == doctest::Approx(0.001).epsilon(1e-7));

  // zero gradients forever: x never moves
  MomentState st2(2);
  DenseVector x{4.0, -1.0};
  for (int t = 0; t < 50; ++t) {
    x = adam_step(x, DenseVector(2), st2, cfg).new_x;
  }
  CHECK(x[0] == 4.0);
  CHECK(x[1] == -1.0);
}

TEST_CASE("momentum sgd examples") {
  HomeConfig cfg = config_with_iters(100);

  MomentState st(1);
  CHECK(momentum_sgd_step(DenseVector{2.0}, DenseVector{0.0}, st, cfg).new_x[0] ==
        2.0);

  // single step from zero state is a plain gradient step
  MomentState st2(1);
  const StepReport one =
      momentum_sgd_step(DenseVector{2.0}, DenseVector{0.5}, st2, cfg);
  CHECK(one.new_x[0] == doctest::Approx(2.0 - 0.001 * 0.5).epsilon(1e-15));

  // two-step hand computation
  MomentState st3(1);
  const double g1 = 0.5, g2 = -0.25;
  const StepReport s1 = momentum_sgd_step(DenseVector{1.0}, DenseVector{g1}, st3, cfg);
  const StepReport s2 = momentum_sgd_step(s1.new_x, DenseVector{g2}, st3, cfg);
  const double lr0 = 0.001, lr1 = 0.001 * (1.0 - 1.0 / 100.0);
  const double m1 = g1;
  const double m2 = 0.9 * m1 + g2;
  const double expected = (1.0 - lr0 * m1) - lr1 * m2;
  CHECK(s2.new_x[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("storm examples") {
  // a = 1 collapses to plain gradient descent
  HomeConfig cfg = config_with_iters(100);
  cfg.storm_a = 1.0;
  MomentState st(1);
  const StepReport gd =
      storm_step(DenseVector{1.0}, DenseVector{0.5}, DenseVector{0.3}, st, cfg);
  CHECK(gd.new_x[0] == doctest::Approx(1.0 - 0.001 * 0.5).epsilon(1e-15));

  // zero gradients: no motion
  HomeConfig cfg2 = config_with_iters(100);
  MomentState st2(2);
  const StepReport rest = storm_step(DenseVector{1.0, 2.0}, DenseVector(2),
                                     DenseVector(2), st2, cfg2);
  CHECK(rest.new_x[0] == 1.0);
  CHECK(rest.new_x[1] == 2.0);

  // two-step hand trace with a = 0.1
  MomentState st3(1);
  const double g1 = 0.5, g2 = 0.2;
  const StepReport s1 =
      storm_step(DenseVector{1.0}, DenseVector{g1}, DenseVector{0.0}, st3, cfg2);
  const double d1 = g1;
  CHECK(s1.new_x[0] == doctest::Approx(1.0 - 0.001 * d1).epsilon(1e-15));
  const StepReport s2 =
      storm_step(s1.new_x, DenseVector{g2}, DenseVector{g1}, st3, cfg2);
  const double d2 = g2 + 0.9 * (d1 - g1);
  const double lr1 = 0.001 * (1.0 - 1.0 / 100.0);
  CHECK(s2.new_x[0] == doctest::Approx(s1.new_x[0] - lr1 * d2).epsilon(1e-14));
}

TEST_CASE("moment boundedness under a gradient bound") {
  const double bound = 2.5;
  HomeConfig cfg = config_with_iters(400);
  Rng rng(0xb0);
  MomentState st(6);
  DenseVector x(6, 1.0);
  for (int t = 0; t < 400; ++t) {
    DenseVector g(6);
    for (double& v : g.data) v = rng.next_uniform(-bound, bound);
    x = home3_step(x, g, st, cfg, nullptr).new_x;

    const double slack = 1e-9;
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(std::abs(st.m[i] / (1.0 - st.beta1_pow)) <= bound + slack);
      CHECK(st.v[i] >= 0.0);
      CHECK(std::abs(st.v[i] / (1.0 - st.beta2_pow)) <= bound * bound + slack);
      CHECK(std::abs(st.s[i] / (1.0 - st.beta3_pow)) <=
            bound * bound * bound + slack);
    }
  }
}

TEST_CASE("small gradients keep the cube below the gradient componentwise") {
  Rng rng(0x5c);
  for (int trial = 0; trial < 5000; ++trial) {
    const double g = rng.next_uniform(-1.0, 1.0);
    CHECK(std::abs(g * g * g) <= std::abs(g));
  }
}

TEST_CASE("generic momentum power feeds g^n into the high-order channel") {
  HomeConfig cfg = config_with_iters(10);
  cfg.momentum_power = 5;
  MomentState st(1);
  const double g = 0.5;
  home3_step(DenseVector{1.0}, DenseVector{g}, st, cfg, nullptr);
  const double shat = st.s[0] / (1.0 - st.beta3_pow);
  CHECK(shat == doctest::Approx(g * g * g * g * g).epsilon(1e-14));
}

TEST_CASE("the ablation clip bounds what the moment channels see") {
  HomeConfig cfg = config_with_iters(10);
  cfg.grad_clip_inf = 1.0;
  MomentState st(2);
  home3_step(DenseVector{0.0, 0.0}, DenseVector{5.0, -3.0}, st, cfg, nullptr);
  CHECK(st.m[0] / (1.0 - st.beta1_pow) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.s[1] / (1.0 - st.beta3_pow) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("cubed-channel overflow aborts with iteration and coordinate") {
  HomeConfig cfg = config_with_iters(10);
  MomentState st(2);
  try {
    home3_step(DenseVector{1.0, 1.0}, DenseVector{0.5, 1e200}, st, cfg, nullptr);
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(e.iteration() == 1);
    const std::string msg = e.what();
    CHECK(msg.find("coordinate 1") != std::string::npos);
  }
}

TEST_CASE("run: empty budget records only the initial loss") {
  QuadraticProblem quad(3);
  HomeConfig cfg = config_with_iters(0);
  const RunRecord rec = run(quad, OptimizerKind::home3, cfg, DenseVector{1.0, 2.0, 2.0});
  CHECK(rec.losses.size() == 1);
  CHECK(rec.losses[0] == 4.5);
  CHECK(rec.grad_norms.size() == 1);
  CHECK(rec.randomization_events.empty());
}

TEST_CASE("run: identical configuration yields identical records") {
  QuadraticProblem quad(5);
  HomeConfig cfg = config_with_iters(200);
  cfg.seed = 9;
  cfg.randomization_enabled = true;
  const DenseVector x0{0.3, -0.4, 0.1, 0.9, -0.2};
  const RunRecord a = run(quad, OptimizerKind::home3, cfg, x0);
  const RunRecord b = run(quad, OptimizerKind::home3, cfg, x0);
  CHECK(a.same_trace(b));
}

TEST_CASE("run: home3 descends the quadratic alongside a gradient-descent oracle") {
  QuadraticProblem quad(8);
  HomeConfig cfg = config_with_iters(500);
  DenseVector x0(8);
  for (std::size_t i = 0; i < 8; ++i) x0[i] = (i % 2 == 0 ? 0.4 : -0.3);

  const RunRecord rec = run(quad, OptimizerKind::home3, cfg, x0);
  CHECK(rec.losses.size() == 501);
  CHECK(rec.losses.back() < rec.losses.front());

  // plain gradient-descent oracle on the same schedule reaches the same basin
  DenseVector x = x0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const double lr = 0.001 * (1.0 - static_cast<double>(t) / 500.0);
    for (std::size_t i = 0; i < 8; ++i) x[i] -= lr * x[i];
  }
  CHECK(quad.value(x) < quad.value(x0));
  CHECK(norm2(x) < norm2(x0));

  // final iterate of home3: reconstruct from the recorded loss
  CHECK(std::sqrt(2.0 * rec.losses.back()) < norm2(x0));
}

TEST_CASE("run over all step kinds is finite and shrinks the quadratic") {
  for (const OptimizerKind kind :
       {OptimizerKind::home3, OptimizerKind::adam, OptimizerKind::momentum_sgd,
        OptimizerKind::storm}) {
    QuadraticProblem quad(4);
    HomeConfig cfg = config_with_iters(300);
    const DenseVector x0{0.5, -0.5, 0.25, -0.25};
    const RunRecord rec = run(quad, kind, cfg, x0);
    CHECK(rec.losses.size() == 301);
    CHECK(rec.losses.back() < rec.losses.front());
  }
}

TEST_CASE("adam-reduction holds for the library baseline over long runs") {
  HomeConfig cfg = config_with_iters(1000);
  const double divergence = adam_reduction_divergence(cfg, cfg, 8, {3, 4});
  CHECK(divergence <= 1e-12);
}

TEST_CASE("tampered decay rates break the adam reduction (mutation check)") {
  HomeConfig home_cfg = config_with_iters(300);
  home_cfg.beta1 = 0.8;  // tampered
  HomeConfig oracle_cfg = config_with_iters(300);
  const double divergence = adam_reduction_divergence(home_cfg, oracle_cfg, 8, {0});
  CHECK(divergence > 1e-6);
}
