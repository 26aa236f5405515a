#pragma once

#include <cstdint>
#include <vector>

#include "home3/problem.hpp"
#include "home3/random.hpp"
#include "home3/tensor.hpp"

namespace home3 {

// ---------------------------------------------------------------------------
// Dictionary learning: min ||I - XY|| + lambda * ||Y||_1
// ---------------------------------------------------------------------------

struct DictLearnProblem {
  DenseMatrix input;       // I, p x q
  double lambda = 0.1;     // sparsity trade-off
  std::size_t dict_rank = 1;  // inner dimension of X * Y

  void validate() const;
};

struct DictLearnEval {
  double value = 0.0;
  DenseMatrix grad_x;
  DenseMatrix grad_y;
};

// Unsquared Frobenius residual plus L1 term. The residual-norm gradient is
// the normalized residual, defined as 0 at zero residual; sign(0) = 0 for the
// L1 subgradient.
DictLearnEval dictlearn_value_and_grad(const DictLearnProblem& p,
                                       const DenseMatrix& x, const DenseMatrix& y);

// ||I - XY|| / ||I||; requires a nonzero input matrix.
double reconstruction_loss_dl(const DictLearnProblem& p, const DenseMatrix& x,
                              const DenseMatrix& y);

// ---------------------------------------------------------------------------
// Deep nonlinear matrix factorization with ReLU activation:
// exact-penalty form  ||(prod X_i) relu(Y) + Z - I|| + mu * ||Z||_1
// ---------------------------------------------------------------------------

struct DnmfProblem {
  DenseMatrix input;                    // I, p x q
  std::vector<std::size_t> layer_dims;  // inner dims d_1..d_k; X_i: d_{i-1} x d_i
  double noise_amplitude = 0.0;         // 0 = smooth variant; 0.1 = noisy variant
  double penalty_mu = 1.0;

  void validate() const;
  std::size_t layer_count() const { return layer_dims.size(); }
};

struct DnmfEval {
  double value = 0.0;
  std::vector<DenseMatrix> grad_layers;
  DenseMatrix grad_y;
  DenseMatrix grad_z;
};

// Chain-rule gradients; ReLU and L1 subgradients at 0 are taken as 0, the
// residual-norm gradient is 0 at zero residual.
DnmfEval dnmf_value_and_grad(const DnmfProblem& p,
                             const std::vector<DenseMatrix>& layers,
                             const DenseMatrix& y, const DenseMatrix& z);

// ||(prod X_i) relu(Y) + Z - I|| / ||I||
double reconstruction_loss_dnmf(const DnmfProblem& p,
                                const std::vector<DenseMatrix>& layers,
                                const DenseMatrix& y, const DenseMatrix& z);

// Y + U with U_ij ~ Uniform[-0.1 |median(Y)|, +0.1 |median(Y)|], median over
// all entries; zero median yields Y unchanged.
DenseMatrix inject_noise(const DenseMatrix& y, Rng& rng);

// ---------------------------------------------------------------------------
// Logistic regression: mean cross-entropy + (l2/2) ||w||^2
// ---------------------------------------------------------------------------

struct LogRegProblem {
  DenseMatrix features;     // n x d
  std::vector<int> labels;  // n entries in {0,1}
  double l2_reg = 0.0;

  void validate() const;
};

struct LogRegEval {
  double value = 0.0;
  DenseVector grad;
};

LogRegEval logreg_value_and_grad(const LogRegProblem& p, const DenseVector& w);

// ---------------------------------------------------------------------------
// Flat-vector adapters for the step-based optimizer interface
// ---------------------------------------------------------------------------

class DictLearnObjective : public Problem {
 public:
  explicit DictLearnObjective(DictLearnProblem p);

  std::size_t dim() const override { return layout_.total(); }
  double value(const DenseVector& x) const override;
  DenseVector gradient(const DenseVector& x) const override;
  double metric(const DenseVector& x) const override;  // reconstruction loss
  std::string name() const override { return "dictlearn"; }

  const ParamLayout& layout() const { return layout_; }
  const DictLearnProblem& problem() const { return prob_; }

 private:
  DictLearnProblem prob_;
  ParamLayout layout_;  // [X (p x r), Y (r x q)]
};

// Parameters are [X_1..X_k, Y, Z] flattened. The noisy variant redraws its
// per-iteration perturbation U of Y in begin_iteration, keyed by (run seed,
// iteration); evaluation within an iteration is then deterministic and the
// gradients are those of the objective at the shifted feature matrix Y + U.
// The reported metric is the clean reconstruction loss (no noise).
class DnmfObjective : public Problem {
 public:
  explicit DnmfObjective(DnmfProblem p);

  std::size_t dim() const override { return layout_.total(); }
  double value(const DenseVector& x) const override;
  DenseVector gradient(const DenseVector& x) const override;
  double metric(const DenseVector& x) const override;
  std::string name() const override;
  void begin_iteration(std::uint64_t iter, std::uint64_t run_seed,
                       const DenseVector& current) override;

  const ParamLayout& layout() const { return layout_; }
  const DnmfProblem& problem() const { return prob_; }

 private:
  struct Unpacked {
    std::vector<DenseMatrix> layers;
    DenseMatrix y;
    DenseMatrix z;
  };
  Unpacked unpack(const DenseVector& x) const;

  DnmfProblem prob_;
  ParamLayout layout_;
  DenseMatrix noise_;  // current-iteration U, zero when noise_amplitude == 0
};

class LogRegObjective : public Problem {
 public:
  explicit LogRegObjective(LogRegProblem p);

  std::size_t dim() const override { return prob_.features.cols; }
  double value(const DenseVector& x) const override;
  DenseVector gradient(const DenseVector& x) const override;
  std::string name() const override { return "logreg"; }

  const LogRegProblem& problem() const { return prob_; }

 private:
  LogRegProblem prob_;
};

}  // namespace home3
