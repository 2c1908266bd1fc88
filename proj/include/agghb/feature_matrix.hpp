#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace agghb {

/// Row-major design matrix, stored either as compressed rows or densely.
/// Narrow matrices are cheaper dense: at most kDenseColumnLimit columns and
/// every row fits in a couple of SIMD registers.
class FeatureMatrix {
 public:
  enum class Layout { sparse, dense };

  static constexpr std::size_t kDenseColumnLimit = 64;

  FeatureMatrix() = default;

  /// Validates that row_ptr is monotone with row_ptr.back() == nnz, that
  /// column indices are < cols and strictly increasing within a row, and that
  /// every value is finite.
  static FeatureMatrix from_csr(std::size_t rows, std::size_t cols,
                                std::vector<std::size_t> row_ptr,
                                std::vector<std::uint32_t> col_index,
                                std::vector<double> values);

  static FeatureMatrix from_dense(std::size_t rows, std::size_t cols,
                                  std::vector<double> row_major);

  FeatureMatrix to_layout(Layout layout) const;

  /// Dense when cols <= kDenseColumnLimit, sparse otherwise.
  FeatureMatrix with_preferred_layout() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Layout layout() const { return layout_; }
  std::size_t stored_entries() const { return values_.size(); }

  double row_dot(std::size_t row, std::span<const double> x) const;
  void row_axpy(std::size_t row, double alpha, std::span<double> y) const;

  /// out = A x
  void multiply(std::span<const double> x, std::span<double> out) const;
  /// out = A^T z
  void multiply_transpose(std::span<const double> z, std::span<double> out) const;

  std::vector<double> to_row_major() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Layout layout_ = Layout::sparse;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
};

/// Binary classification data with labels in {-1, +1}.
struct Dataset {
  FeatureMatrix features;
  std::vector<double> labels;

  std::size_t samples() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
};

}  // namespace agghb
