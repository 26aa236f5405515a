#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "home3/tensor.hpp"

namespace home3 {

// An objective over a flat decision vector: value, closed-form gradient and a
// reporting metric (reconstruction loss for the factorization families, the
// objective itself otherwise). Problems are immutable after construction
// except for the per-iteration sample of stochastic variants, which is
// redrawn in begin_iteration from (run seed, iteration) so evaluation stays
// deterministic within an iteration and runs never share RNG state.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const DenseVector& x) const = 0;
  virtual DenseVector gradient(const DenseVector& x) const = 0;
  virtual double metric(const DenseVector& x) const { return value(x); }
  virtual std::string name() const = 0;

  virtual void begin_iteration(std::uint64_t /*iter*/, std::uint64_t /*run_seed*/,
                               const DenseVector& /*current*/) {}
};

// f(x) = 0.5 * ||x||^2, gradient x. The convex reference problem.
class QuadraticProblem : public Problem {
 public:
  explicit QuadraticProblem(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const override { return dim_; }

  double value(const DenseVector& x) const override {
    double s = 0.0;
    for (double xi : x.data) s += xi * xi;
    return 0.5 * s;
  }

  DenseVector gradient(const DenseVector& x) const override { return x; }

  std::string name() const override { return "quadratic"; }

 private:
  std::size_t dim_;
};

struct MatrixShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

// Maps a list of matrices onto one flat parameter vector (row-major blocks in
// declaration order), so matrix-valued objectives plug into the step-based
// optimizer interface.
class ParamLayout {
 public:
  explicit ParamLayout(std::vector<MatrixShape> shapes);

  std::size_t total() const { return total_; }
  std::size_t count() const { return shapes_.size(); }
  const MatrixShape& shape(std::size_t which) const { return shapes_[which]; }

  DenseMatrix unpack(const DenseVector& x, std::size_t which) const;
  void pack_into(DenseVector& x, std::size_t which, const DenseMatrix& m) const;
  DenseVector pack(const std::vector<DenseMatrix>& mats) const;

 private:
  std::vector<MatrixShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

}  // namespace home3
