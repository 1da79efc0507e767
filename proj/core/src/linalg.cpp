#include "attrmtl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attrmtl/errors.hpp"
#include "attrmtl/rng.hpp"

namespace attrmtl {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOrthTol = 1e-15;

// Orthogonalizes the columns of b in place by plane rotations, accumulating
// the rotations into v. Standard Hestenes one-sided Jacobi, row-cyclic order.
void jacobi_orthogonalize(Matrix& b, Matrix& v) {
  const std::size_t n = b.cols();
  const std::size_t m = b.rows();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          alpha += bp * bp;
          beta += bq * bq;
          gamma += bp * bq;
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
  throw SolverError("svd_thin: Jacobi sweeps did not converge within " +
                    std::to_string(kMaxSweeps) + " sweeps");
}

// Fills column j of u with a unit vector orthogonal to columns [0, j) of u
// that are flagged as valid. Used for directions whose singular value is
// numerically zero.
void complete_basis_column(Matrix& u, std::size_t j, const std::vector<bool>& valid) {
  const std::size_t m = u.rows();
  std::vector<double> w(m);
  for (std::size_t trial = 0; trial < m; ++trial) {
    for (std::size_t i = 0; i < m; ++i) w[i] = (i == trial) ? 1.0 : 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < u.cols(); ++k) {
        if (k != j && !valid[k]) continue;
        if (k == j) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += u(i, k) * w[i];
        for (std::size_t i = 0; i < m; ++i) w[i] -= proj * u(i, k);
      }
    }
    const double nw = norm2(w);
    if (nw > 0.1) {
      for (std::size_t i = 0; i < m; ++i) u(i, j) = w[i] / nw;
      return;
    }
  }
  throw SolverError("svd_thin: failed to complete orthonormal basis");
}

SvdResult svd_thin_tall(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix b = a;
  Matrix v = Matrix::identity(n);
  jacobi_orthogonalize(b, v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(col(b, j));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult r;
  r.u = Matrix(m, n);
  r.v = Matrix(n, n);
  r.sigma.resize(n);
  const double smax = sigma.empty() ? 0.0 : sigma[order[0]];
  const double rank_tol = smax * static_cast<double>(std::max(m, n)) * 1e-15;

  std::vector<bool> valid(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    r.sigma[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) r.v(i, j) = v(i, src);
    if (sigma[src] > rank_tol && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, j) = b(i, src) / sigma[src];
      valid[j] = true;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!valid[j]) {
      complete_basis_column(r.u, j, valid);
      valid[j] = true;
    }
  }

  // Sign convention: largest-magnitude entry of each left vector positive.
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = std::abs(r.u(i, j));
      if (av > best) {
        best = av;
        arg = i;
      }
    }
    if (r.u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, j) = -r.u(i, j);
      for (std::size_t i = 0; i < n; ++i) r.v(i, j) = -r.v(i, j);
    }
  }
  return r;
}

}  // namespace

SvdResult svd_thin(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) throw DataError("svd_thin: empty matrix");
  if (!a.all_finite()) throw DataError("svd_thin: non-finite entry");
  if (a.rows() >= a.cols()) return svd_thin_tall(a);
  // Wide: factor the transpose and swap the factor roles. The sign
  // convention must still act on the left vectors of a, so it is reapplied.
  SvdResult t = svd_thin_tall(transpose(a));
  SvdResult r;
  r.u = std::move(t.v);
  r.v = std::move(t.u);
  r.sigma = std::move(t.sigma);
  for (std::size_t j = 0; j < r.u.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < r.u.rows(); ++i) {
      const double av = std::abs(r.u(i, j));
      if (av > best) {
        best = av;
        arg = i;
      }
    }
    if (r.u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, j) = -r.u(i, j);
      for (std::size_t i = 0; i < r.v.rows(); ++i) r.v(i, j) = -r.v(i, j);
    }
  }
  return r;
}

double spectral_norm_sq_bound(const Matrix& a) {
  if (max_abs(a) == 0.0) return 0.0;
  const std::size_t n = a.cols();

  Rng rng(0x5EEDBA11u);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  double nv = norm2(v);
  for (double& x : v) x /= nv;

  double lambda = 0.0;
  int small_changes = 0;
  for (int it = 0; it < 2000; ++it) {
    const std::vector<double> w = matvec(a, v);
    const double lam = dot(w, w);
    std::vector<double> next = matvec_t(a, w);
    const double nn = norm2(next);
    if (nn == 0.0) {
      // Start vector landed in the kernel; Frobenius bound is still valid.
      if (lam > 0.0) break;
      double fro = frobenius_norm(a);
      return fro * fro;
    }
    for (double& x : next) x /= nn;
    v = std::move(next);
    if (lam - lambda <= 1e-7 * std::max(1.0, lam)) {
      if (++small_changes >= 3) {
        lambda = lam;
        break;
      }
    } else {
      small_changes = 0;
    }
    lambda = lam;
  }
  return lambda * 1.04;
}

std::vector<double> cholesky_solve_spd(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw DataError("cholesky_solve_spd: shape mismatch");
  Matrix l(n, n);
  double diag_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(a(i, i)));
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= diag_max * 1e-14) {
      throw SolverError("cholesky_solve_spd: non-positive pivot at column " +
                        std::to_string(j) + " (matrix not positive definite enough)");
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  // Forward then backward substitution.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

}  // namespace attrmtl
