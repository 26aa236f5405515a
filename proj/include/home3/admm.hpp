#pragma once

#include <cstdint>
#include <vector>

#include "home3/problems.hpp"
#include "home3/record.hpp"
#include "home3/tensor.hpp"

namespace home3 {

// Solves the SPD system A X = B by Cholesky; on a failed factorization the
// diagonal is ridge-damped (jitter grows geometrically until it succeeds).
DenseMatrix spd_solve(const DenseMatrix& a, const DenseMatrix& b);

struct AdmmResult {
  DenseMatrix y;                        // sparse estimate (the split variable)
  std::vector<double> primal_residuals;  // ||Y - W||_F per sweep
  std::vector<double> dual_residuals;    // rho ||W_k - W_{k-1}||_F per sweep
};

// ADMM for the lasso-in-Y subproblem at fixed X:
//   min_Y 0.5 ||I - XY||_F^2 + lambda ||Y||_1
// Splitting Y = W with scaled dual U; the returned matrix is the thresholded
// block, which carries exact sparsity.
AdmmResult admm_dictlearn_solve(const DictLearnProblem& p, const DenseMatrix& x_fixed,
                                std::size_t iters, double rho = 1.0);

// Ridge-damped least-squares update of the weight matrix at fixed Y:
//   X = I Y^T (Y Y^T + ridge I)^{-1}
DenseMatrix least_squares_x_update(const DenseMatrix& input, const DenseMatrix& y,
                                   double ridge = 1e-8);

// Alternating baseline for experiment runs: per outer iteration a block of
// ADMM sweeps in Y (warm-started) followed by the least-squares X update.
// The trace reuses the standard columns: grad_norm holds the last primal
// residual of the iteration, moment_gap the last dual residual.
RunRecord admm_dictlearn_run(const DictLearnProblem& p, std::uint64_t seed,
                             std::uint64_t outer_iters, std::size_t inner_sweeps = 5,
                             double rho = 1.0, double init_scale = 0.1);

}  // namespace home3
