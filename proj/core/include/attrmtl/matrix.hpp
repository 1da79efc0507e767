#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attrmtl {

// Dense row-major matrix of doubles. Constructors taking entry data reject
// NaN/Inf; downstream code may therefore assume finiteness of anything it is
// handed. Immutable-by-convention in the model layer, mutable scratch in the
// solvers.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  // Validating constructor: data.size() must equal rows*cols, entries finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);

Matrix transpose(const Matrix& a);
// a^T * b without forming the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

// y = a * x for a column vector x.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
// y = a^T * x.
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);
void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y);

std::vector<double> col(const Matrix& a, std::size_t j);
void set_col(Matrix& a, std::size_t j, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

}  // namespace attrmtl
