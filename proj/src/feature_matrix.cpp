#include "agghb/feature_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "agghb/simd.hpp"

namespace agghb {

FeatureMatrix FeatureMatrix::from_csr(std::size_t rows, std::size_t cols,
                                      std::vector<std::size_t> row_ptr,
                                      std::vector<std::uint32_t> col_index,
                                      std::vector<double> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != values.size() || col_index.size() != values.size()) {
    throw std::invalid_argument("FeatureMatrix: inconsistent compressed-row arrays");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) {
      throw std::invalid_argument("FeatureMatrix: row pointers must be nondecreasing");
    }
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_index[k] >= cols) {
        throw std::invalid_argument("FeatureMatrix: column index " +
                                    std::to_string(col_index[k]) + " out of range in row " +
                                    std::to_string(i));
      }
      if (k > row_ptr[i] && col_index[k] <= col_index[k - 1]) {
        throw std::invalid_argument("FeatureMatrix: columns must increase within row " +
                                    std::to_string(i));
      }
      if (!std::isfinite(values[k])) {
        throw std::invalid_argument("FeatureMatrix: non-finite value in row " +
                                    std::to_string(i));
      }
    }
  }
  FeatureMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.layout_ = Layout::sparse;
  m.row_ptr_ = std::move(row_ptr);
  m.col_index_ = std::move(col_index);
  m.values_ = std::move(values);
  return m;
}

FeatureMatrix FeatureMatrix::from_dense(std::size_t rows, std::size_t cols,
                                        std::vector<double> row_major) {
  if (row_major.size() != rows * cols) {
    throw std::invalid_argument("FeatureMatrix: dense storage has wrong size");
  }
  if (!std::all_of(row_major.begin(), row_major.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("FeatureMatrix: non-finite value");
  }
  FeatureMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.layout_ = Layout::dense;
  m.values_ = std::move(row_major);
  return m;
}

std::vector<double> FeatureMatrix::to_row_major() const {
  if (layout_ == Layout::dense) return values_;
  std::vector<double> out(rows_ * cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out[i * cols_ + col_index_[k]] = values_[k];
    }
  }
  return out;
}

FeatureMatrix FeatureMatrix::to_layout(Layout layout) const {
  if (layout == layout_) return *this;
  if (layout == Layout::dense) return from_dense(rows_, cols_, to_row_major());
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const double v = values_[i * cols_ + j];
      if (v != 0.0) {
        cols.push_back(static_cast<std::uint32_t>(j));
        vals.push_back(v);
      }
    }
    row_ptr.push_back(vals.size());
  }
  return from_csr(rows_, cols_, std::move(row_ptr), std::move(cols), std::move(vals));
}

FeatureMatrix FeatureMatrix::with_preferred_layout() const {
  return to_layout(cols_ <= kDenseColumnLimit ? Layout::dense : Layout::sparse);
}

double FeatureMatrix::row_dot(std::size_t row, std::span<const double> x) const {
  const auto& k = simd::kernels();
  if (layout_ == Layout::dense) return k.dot(values_.data() + row * cols_, x.data(), cols_);
  const std::size_t begin = row_ptr_[row];
  return k.sparse_dot(values_.data() + begin, col_index_.data() + begin,
                      row_ptr_[row + 1] - begin, x.data());
}

void FeatureMatrix::row_axpy(std::size_t row, double alpha, std::span<double> y) const {
  const auto& k = simd::kernels();
  if (layout_ == Layout::dense) {
    k.axpy(alpha, values_.data() + row * cols_, y.data(), cols_);
    return;
  }
  const std::size_t begin = row_ptr_[row];
  k.sparse_axpy(alpha, values_.data() + begin, col_index_.data() + begin,
                row_ptr_[row + 1] - begin, y.data());
}

void FeatureMatrix::multiply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != cols_ || out.size() != rows_) {
    throw std::invalid_argument("FeatureMatrix::multiply: dimension mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) out[i] = row_dot(i, x);
}

void FeatureMatrix::multiply_transpose(std::span<const double> z,
                                       std::span<double> out) const {
  if (z.size() != rows_ || out.size() != cols_) {
    throw std::invalid_argument("FeatureMatrix::multiply_transpose: dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (z[i] != 0.0) row_axpy(i, z[i], out);
  }
}

}  // namespace agghb
