#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tmaf {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Construction from external data rejects NaN/Inf; internal arithmetic only
/// checks finiteness in debug builds.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data`; throws DimensionError on a length mismatch and
  /// NumericError on a non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// "rows x cols", used in error messages.
  std::string shape() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One sample per row: rows() is the sample count n, cols() the feature dim.
using Batch = Matrix;

enum class ElementwiseOp { kAdd, kSub, kMul, kDiv };

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose of b in the caller.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// out += a^T * b. `out` must already be a.cols() x b.cols().
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
Matrix transpose(const Matrix& a);

/// Row i of the result is w * x_i + b.
Batch affine_batch(const Batch& x, const Matrix& w, std::span<const double> b);

Matrix elementwise(ElementwiseOp op, const Matrix& a, const Matrix& b);
double reduce_mean(const Matrix& a);
/// Per-column sum over rows.
Vector column_sum(const Matrix& a);

/// Throws NumericError naming `what` if any entry is NaN or Inf.
void ensure_finite(std::span<const double> values, const std::string& what);

}  // namespace tmaf
