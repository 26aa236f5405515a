#include "home3/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace home3 {

std::string DenseMatrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

DenseVector elementwise_pow(const DenseVector& v, int n) {
  if (n < 1) {
    throw std::invalid_argument("elementwise_pow: power must be >= 1, got " +
                                std::to_string(n));
  }
  DenseVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    double acc = v[i];
    for (int k = 1; k < n; ++k) acc *= v[i];
    if (!std::isfinite(acc)) {
      throw numeric_error("elementwise_pow: non-finite result at index " +
                              std::to_string(i) + " (base " +
                              std::to_string(v[i]) + ", power " +
                              std::to_string(n) + ")",
                          i);
    }
    out[i] = acc;
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() +
                                " * " + b.shape_str());
  }
  DenseMatrix out(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      const double* brow = &b.data[k * b.cols];
      double* orow = &out.data[i * out.cols];
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

DenseMatrix relu(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  return out;
}

static void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                               const char* op) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
  }
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "sub");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

DenseMatrix scale(const DenseMatrix& m, double c) {
  DenseMatrix out = m;
  for (double& x : out.data) x *= c;
  return out;
}

// Kahan-compensated sum of squares.
static double compensated_sum_of_squares(const std::vector<double>& xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double term = x * x;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double frobenius_norm(const DenseMatrix& m) {
  return std::sqrt(compensated_sum_of_squares(m.data));
}

double norm2(const DenseVector& v) {
  return std::sqrt(compensated_sum_of_squares(v.data));
}

double norm2(const std::vector<double>& xs) {
  return std::sqrt(compensated_sum_of_squares(xs));
}

double norm_inf(const DenseVector& v) {
  double m = 0.0;
  for (double x : v.data) m = std::max(m, std::abs(x));
  return m;
}

double sum_abs(const DenseMatrix& m) {
  double s = 0.0;
  for (double x : m.data) s += std::abs(x);
  return s;
}

// Median over all entries; even count takes the mean of the two central values.
double median_of_entries(const DenseMatrix& m) {
  if (m.data.empty()) throw std::invalid_argument("median_of_entries: empty matrix");
  std::vector<double> sorted = m.data;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::size_t first_non_finite(const std::vector<double>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i])) return i;
  return npos;
}

bool all_finite(const DenseVector& v) { return first_non_finite(v.data) == npos; }
bool all_finite(const DenseMatrix& m) { return first_non_finite(m.data) == npos; }

}  // namespace home3
