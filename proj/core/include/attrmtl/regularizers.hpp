#pragma once

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

// Blocks are the (latent row k, group g) slices of s. With size weighting on,
// block g carries weight sqrt(|g|), otherwise 1.

// Omega(s) = sum_k sum_g w_g * ||s_k^g||_2
double group_l21_value(const Matrix& s, const GroupPartition& partition,
                       bool size_weighted = false);

// argmin_z 0.5*||z - v||^2 + t * Omega(z): blockwise shrink by t*w_g.
Matrix prox_group_l21(const Matrix& v, double t, const GroupPartition& partition,
                      bool size_weighted = false);

struct SmoothedPenalty {
  double value = 0.0;
  Matrix gradient;
  double nu = 0.0;
  // Upper bound on Omega(s) - Omega_nu(s), uniform in s.
  double gap_bound = 0.0;
};

// Huber-style smoothing of Omega with scale nu > 0: each block norm ||b||
// becomes ||b||^2/(2 nu) inside the nu-ball and ||b|| - nu/2 outside. The
// gradient is w_g * b / max(nu, ||b||), which is 1/nu-Lipschitz per block.
SmoothedPenalty smooth_group_l21(const Matrix& s, const GroupPartition& partition, double nu,
                                 bool size_weighted = false);

double l1_value(const Matrix& a);
// Entrywise soft threshold at t >= 0.
Matrix prox_l1(const Matrix& v, double t);

double frobenius_sq(const Matrix& a);
Matrix frobenius_sq_grad(const Matrix& a);  // 2 * a

}  // namespace attrmtl
