#include "tmaf/la.hpp"

#include <cmath>

#include "tmaf/error.hpp"

namespace tmaf {
namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " entries for shape " + shape());
  }
  ensure_finite(data_, "Matrix");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + a.shape() + " * " + b.shape());
  }
  Matrix out(a.rows(), b.cols());
  // i-k-j order keeps the innermost loop a contiguous axpy.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + a.shape() + " * (" + b.shape() +
                         ")^T");
  }
  return matmul(a, transpose(b));
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("matmul_tn: (" + a.shape() + ")^T * " + b.shape() + " into " +
                         out.shape());
  }
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* a_row = a.row(k).data();
    const double* b_row = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      double* out_row = out.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Batch affine_batch(const Batch& x, const Matrix& w, std::span<const double> b) {
  if (x.cols() != w.cols() || b.size() != w.rows()) {
    throw DimensionError("affine_batch: input " + x.shape() + ", weight " + w.shape() +
                         ", bias length " + std::to_string(b.size()));
  }
  const Matrix wt = transpose(w);
  Batch out(x.rows(), w.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t j = 0; j < w.rows(); ++j) out_row[j] = b[j];
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xik = x(i, k);
      const double* wt_row = wt.row(k).data();
      for (std::size_t j = 0; j < w.rows(); ++j) out_row[j] += xik * wt_row[j];
    }
  }
  return out;
}

Matrix elementwise(ElementwiseOp op, const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "elementwise");
  Matrix out(a.rows(), a.cols());
  auto lhs = a.data();
  auto rhs = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    switch (op) {
      case ElementwiseOp::kAdd: dst[i] = lhs[i] + rhs[i]; break;
      case ElementwiseOp::kSub: dst[i] = lhs[i] - rhs[i]; break;
      case ElementwiseOp::kMul: dst[i] = lhs[i] * rhs[i]; break;
      case ElementwiseOp::kDiv: dst[i] = lhs[i] / rhs[i]; break;
    }
  }
  return out;
}

double reduce_mean(const Matrix& a) {
  if (a.empty()) throw DimensionError("reduce_mean: empty matrix");
  double sum = 0.0;
  for (double v : a.data()) sum += v;
  return sum / static_cast<double>(a.size());
}

Vector column_sum(const Matrix& a) {
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j];
  }
  return out;
}

void ensure_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

}  // namespace tmaf
