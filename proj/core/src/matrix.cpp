#include "attrmtl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "attrmtl/errors.hpp"

namespace attrmtl {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DataError("matrix: data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
  if (!all_finite()) throw DataError("matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void check_mul(std::size_t ac, std::size_t br, const char* what) {
  if (ac != br) {
    throw DataError(std::string(what) + ": inner dimensions " +
                    std::to_string(ac) + " vs " + std::to_string(br));
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Matrix operator*(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  // i-k-j ordering: unit-stride access on both b and c.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "sub");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator*(double c, const Matrix& a) {
  Matrix r = a;
  for (double& v : r.data()) v *= c;
  return r;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  check_mul(a.rows(), b.rows(), "matmul_at_b");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.cols(), "matmul_a_bt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(ai, b.row(j));
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  matvec(a, x, y);
  return y;
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check_mul(a.cols(), x.size(), "matvec");
  check_mul(a.rows(), y.size(), "matvec out");
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.cols());
  matvec_t(a, x, y);
  return y;
}

void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check_mul(a.rows(), x.size(), "matvec_t");
  check_mul(a.cols(), y.size(), "matvec_t out");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * ai[j];
  }
}

std::vector<double> col(const Matrix& a, std::size_t j) {
  std::vector<double> v(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) v[i] = a(i, j);
  return v;
}

void set_col(Matrix& a, std::size_t j, std::span<const double> v) {
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = v[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace attrmtl
