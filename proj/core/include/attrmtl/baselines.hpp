#pragma once

#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"
#include "attrmtl/optim.hpp"

namespace attrmtl {

// Per-task independent L1 squared-hinge: column m of the result solves
// min_w loss_m(w) + gamma * |w|_1. No information is shared across tasks.
Matrix train_single_lasso(const Dataset& ds, double gamma, const SolverOpts& opts);

// Joint squared hinge with a row-wise L21 penalty on the stacked weight
// matrix: min_W sum_m loss_m(w^m) + mu * sum_j ||W_j,:||_2. All tasks share
// one feature-selection pattern but no latent subspace.
Matrix train_l21_all(const Dataset& ds, double mu, const SolverOpts& opts);

// Per-task ridge regression against the +-1 labels, solved in closed form.
// Tasks sharing a design matrix share one Gram factorization.
Matrix train_ridge(const Dataset& ds, double lambda_r);

// Wraps a flat weight matrix as (l = w, s = identity) so baseline models run
// through the same save/predict/eval paths as latent ones.
LatentModel as_latent(const Matrix& w, std::vector<std::string> task_names);

}  // namespace attrmtl
