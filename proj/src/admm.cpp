#include "home3/admm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "home3/random.hpp"

namespace home3 {

// In-place lower Cholesky; false on a non-positive pivot.
static bool cholesky_factor(DenseMatrix& a) {
  const std::size_t n = a.rows;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  return true;
}

// Solves L L^T X = B column by column.
static DenseMatrix cholesky_solve(const DenseMatrix& l, const DenseMatrix& b) {
  const std::size_t n = l.rows;
  DenseMatrix x = b;
  for (std::size_t c = 0; c < b.cols; ++c) {
    // forward substitution
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    // back substitution with L^T
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

DenseMatrix spd_solve(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != a.cols) {
    throw std::invalid_argument("spd_solve: matrix not square, " + a.shape_str());
  }
  if (a.rows != b.rows) {
    throw std::invalid_argument("spd_solve: rhs rows " + b.shape_str() +
                                " != system " + a.shape_str());
  }
  double diag_scale = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    diag_scale = std::max(diag_scale, std::abs(a(i, i)));
  if (diag_scale == 0.0) diag_scale = 1.0;

  double jitter = 0.0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    DenseMatrix factor = a;
    if (jitter > 0.0) {
      for (std::size_t i = 0; i < a.rows; ++i) factor(i, i) += jitter;
    }
    if (cholesky_factor(factor)) return cholesky_solve(factor, b);
    jitter = jitter == 0.0 ? 1e-12 * diag_scale : jitter * 10.0;
  }
  throw numeric_error("spd_solve: factorization failed after ridge damping", 0);
}

static double soft_threshold(double v, double kappa) {
  if (v > kappa) return v - kappa;
  if (v < -kappa) return v + kappa;
  return 0.0;
}

AdmmResult admm_dictlearn_solve(const DictLearnProblem& p, const DenseMatrix& x_fixed,
                                std::size_t iters, double rho) {
  p.validate();
  if (iters == 0) throw std::invalid_argument("admm_dictlearn_solve: iters must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("admm_dictlearn_solve: rho must be > 0");
  if (x_fixed.rows != p.input.rows) {
    throw std::invalid_argument("admm_dictlearn_solve: X shape " +
                                x_fixed.shape_str() + " incompatible with I " +
                                p.input.shape_str());
  }

  const std::size_t r = x_fixed.cols;
  const std::size_t q = p.input.cols;

  DenseMatrix gram = matmul(transpose(x_fixed), x_fixed);
  for (std::size_t i = 0; i < r; ++i) gram(i, i) += rho;
  const DenseMatrix xti = matmul(transpose(x_fixed), p.input);

  DenseMatrix w(r, q, 0.0), u(r, q, 0.0);
  AdmmResult out;
  out.primal_residuals.reserve(iters);
  out.dual_residuals.reserve(iters);

  for (std::size_t it = 0; it < iters; ++it) {
    DenseMatrix rhs = xti;
    for (std::size_t i = 0; i < rhs.size(); ++i)
      rhs.data[i] += rho * (w.data[i] - u.data[i]);
    const DenseMatrix y = spd_solve(gram, rhs);

    const DenseMatrix w_prev = w;
    const double kappa = p.lambda / rho;
    for (std::size_t i = 0; i < w.size(); ++i)
      w.data[i] = soft_threshold(y.data[i] + u.data[i], kappa);

    double primal_sq = 0.0, dual_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double pr = y.data[i] - w.data[i];
      const double du = w.data[i] - w_prev.data[i];
      primal_sq += pr * pr;
      dual_sq += du * du;
      u.data[i] += pr;
    }
    out.primal_residuals.push_back(std::sqrt(primal_sq));
    out.dual_residuals.push_back(rho * std::sqrt(dual_sq));
    out.y = w;
  }
  return out;
}

DenseMatrix least_squares_x_update(const DenseMatrix& input, const DenseMatrix& y,
                                   double ridge) {
  DenseMatrix gram = matmul(y, transpose(y));
  double scale = 0.0;
  for (std::size_t i = 0; i < gram.rows; ++i)
    scale = std::max(scale, std::abs(gram(i, i)));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 0; i < gram.rows; ++i) gram(i, i) += ridge * scale;
  // X^T = (Y Y^T + ridge)^{-1} Y I^T
  const DenseMatrix rhs = matmul(y, transpose(input));
  return transpose(spd_solve(gram, rhs));
}

RunRecord admm_dictlearn_run(const DictLearnProblem& p, std::uint64_t seed,
                             std::uint64_t outer_iters, std::size_t inner_sweeps,
                             double rho, double init_scale) {
  p.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t r = p.dict_rank;
  const std::size_t q = p.input.cols;

  Rng rng(mix_seed(seed, 0xad33));
  DenseMatrix x(p.input.rows, r);
  for (double& v : x.data) v = init_scale * rng.next_gaussian();
  DenseMatrix y(r, q, 0.0);

  RunRecord rec;
  rec.losses.push_back(reconstruction_loss_dl(p, x, y));
  rec.grad_norms.push_back(0.0);
  rec.moment_gaps.push_back(0.0);

  // Warm-started split/dual blocks across outer iterations.
  DenseMatrix w(r, q, 0.0), u(r, q, 0.0);
  for (std::uint64_t outer = 0; outer < outer_iters; ++outer) {
    DenseMatrix gram = matmul(transpose(x), x);
    for (std::size_t i = 0; i < r; ++i) gram(i, i) += rho;
    const DenseMatrix xti = matmul(transpose(x), p.input);

    double primal = 0.0, dual = 0.0;
    for (std::size_t sweep = 0; sweep < inner_sweeps; ++sweep) {
      DenseMatrix rhs = xti;
      for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs.data[i] += rho * (w.data[i] - u.data[i]);
      y = spd_solve(gram, rhs);

      const double kappa = p.lambda / rho;
      double primal_sq = 0.0, dual_sq = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double w_new = soft_threshold(y.data[i] + u.data[i], kappa);
        const double du = w_new - w.data[i];
        w.data[i] = w_new;
        const double pr = y.data[i] - w_new;
        u.data[i] += pr;
        primal_sq += pr * pr;
        dual_sq += du * du;
      }
      primal = std::sqrt(primal_sq);
      dual = rho * std::sqrt(dual_sq);
    }

    x = least_squares_x_update(p.input, w);
    const double loss = reconstruction_loss_dl(p, x, w);
    if (!std::isfinite(loss)) {
      throw numeric_error("admm run: non-finite loss at outer iteration " +
                              std::to_string(outer + 1),
                          0, outer + 1);
    }
    rec.losses.push_back(loss);
    rec.grad_norms.push_back(primal);
    rec.moment_gaps.push_back(dual);
  }

  rec.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return rec;
}

}  // namespace home3
