#pragma once

#include <vector>

#include "attrmtl/matrix.hpp"

namespace attrmtl {

struct SvdResult {
  Matrix u;                   // rows(a) x k, orthonormal columns
  std::vector<double> sigma;  // k = min(rows, cols), sorted descending
  Matrix v;                   // cols(a) x k, orthonormal columns
};

// Thin SVD a = u * diag(sigma) * v^T by one-sided Jacobi. Accurate at dense
// sizes up to a few thousand and dependency-free. Column signs are fixed so
// the largest-magnitude entry of each left vector is positive, which makes
// downstream initializations platform-stable. Throws SolverError if the
// sweep cap is hit before the columns decouple.
SvdResult svd_thin(const Matrix& a);

// Upper bound on sigma_max(a)^2, within 5% of the true value: power
// iteration on a^T a with a fixed internal seed, times a 1.04 safety factor.
// Zero matrix gives 0.
double spectral_norm_sq_bound(const Matrix& a);

// Solves (symmetric positive definite) a * x = b via Cholesky.
// Throws SolverError when a pivot collapses (ill-conditioned system).
std::vector<double> cholesky_solve_spd(const Matrix& a, std::span<const double> b);

}  // namespace attrmtl
