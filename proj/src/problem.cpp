#include "home3/problem.hpp"

#include <stdexcept>

namespace home3 {

ParamLayout::ParamLayout(std::vector<MatrixShape> shapes)
    : shapes_(std::move(shapes)) {
  offsets_.reserve(shapes_.size());
  for (const MatrixShape& s : shapes_) {
    if (s.rows == 0 || s.cols == 0) {
      throw std::invalid_argument("ParamLayout: zero-sized matrix block");
    }
    offsets_.push_back(total_);
    total_ += s.size();
  }
}

DenseMatrix ParamLayout::unpack(const DenseVector& x, std::size_t which) const {
  if (x.dim() != total_) {
    throw std::invalid_argument("ParamLayout::unpack: vector dim " +
                                std::to_string(x.dim()) + " != layout total " +
                                std::to_string(total_));
  }
  const MatrixShape& s = shapes_.at(which);
  DenseMatrix m(s.rows, s.cols);
  const std::size_t off = offsets_[which];
  for (std::size_t i = 0; i < s.size(); ++i) m.data[i] = x[off + i];
  return m;
}

void ParamLayout::pack_into(DenseVector& x, std::size_t which,
                            const DenseMatrix& m) const {
  const MatrixShape& s = shapes_.at(which);
  if (m.rows != s.rows || m.cols != s.cols) {
    throw std::invalid_argument("ParamLayout::pack_into: shape mismatch " +
                                m.shape_str());
  }
  if (x.dim() != total_) x = DenseVector(total_);
  const std::size_t off = offsets_[which];
  for (std::size_t i = 0; i < s.size(); ++i) x[off + i] = m.data[i];
}

DenseVector ParamLayout::pack(const std::vector<DenseMatrix>& mats) const {
  if (mats.size() != shapes_.size()) {
    throw std::invalid_argument("ParamLayout::pack: expected " +
                                std::to_string(shapes_.size()) + " blocks, got " +
                                std::to_string(mats.size()));
  }
  DenseVector x(total_);
  for (std::size_t b = 0; b < mats.size(); ++b) pack_into(x, b, mats[b]);
  return x;
}

}  // namespace home3
