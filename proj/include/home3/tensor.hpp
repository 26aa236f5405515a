#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace home3 {

// Thrown when an operation produces or encounters a non-finite value.
// Carries enough context (coordinate, iteration) to locate the overflow.
class numeric_error : public std::runtime_error {
 public:
  numeric_error(const std::string& what, std::size_t index,
                std::uint64_t iteration = 0)
      : std::runtime_error(what), index_(index), iteration_(iteration) {}

  std::size_t index() const { return index_; }
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::size_t index_;
  std::uint64_t iteration_;
};

// Dense row-major matrix of 64-bit floats. Shapes are validated at call
// boundaries; element kernels stay branch-free and non-finite values are
// detected eagerly by the layers above (optimizer step, loaders).
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, data.size() == rows * cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return data.size(); }
  std::string shape_str() const;
};

struct DenseVector {
  std::vector<double> data;

  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : data(dim, fill) {}
  DenseVector(std::initializer_list<double> xs) : data(xs) {}

  std::size_t dim() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool operator==(const DenseVector& other) const { return data == other.data; }
};

// out[i] = v[i]^n by repeated multiplication in fixed order, so
// pow(v,3)[i] == v[i]*v[i]*v[i] bit-for-bit and odd powers keep the sign.
// Requires n >= 1; overflow to non-finite raises numeric_error naming the index.
DenseVector elementwise_pow(const DenseVector& v, int n);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix relu(const DenseMatrix& m);

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& m, double c);

// Norms use compensated summation in canonical ascending-index order: the
// computed value is stable to ~2 ulp regardless of how summands are permuted.
double frobenius_norm(const DenseMatrix& m);
double norm2(const DenseVector& v);
double norm2(const std::vector<double>& xs);
double norm_inf(const DenseVector& v);

double sum_abs(const DenseMatrix& m);
double median_of_entries(const DenseMatrix& m);

bool all_finite(const DenseVector& v);
bool all_finite(const DenseMatrix& m);

// First non-finite index, or npos when all entries are finite.
std::size_t first_non_finite(const std::vector<double>& xs);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace home3
