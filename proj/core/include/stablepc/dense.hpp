#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace stablepc {

using Vector = std::vector<double>;

/// Column-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of column-major `data`; throws DimensionMismatch if
  /// data.size() != rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);
  /// Row-wise literal, convenient in tests: from_rows({{1, 2}, {3, 4}}).
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i + j * rows_]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i + j * rows_]; }

  std::span<double> column(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> column(std::size_t j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Vector kernels. Lengths must agree; checked where a mismatch would be silent.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// Aᵀx
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// AᵀB
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// ABᵀ
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
/// AᵀA, exactly symmetric.
DenseMatrix gram(const DenseMatrix& a);

/// A·diag(d)
DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d);
/// diag(d)·A
DenseMatrix scale_rows(const DenseMatrix& a, std::span<const double> d);

/// max |A_ij - B_ij|
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);

}  // namespace stablepc
