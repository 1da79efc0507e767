#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

// Full training objective at (l, s):
//   loss + mu*Omega(s) [or mu*Omega(s)^2] + gamma*|l|_1 + lambda*|l|_F^2
// with a fixed term order, so repeated evaluation is bit-stable.
ObjectiveTerms objective_terms(const Matrix& l, const Matrix& s, const Dataset& ds,
                               const GroupPartition& partition, const Hyperparams& hp);
double objective(const LatentModel& model, const Dataset& ds, const GroupPartition& partition,
                 const Hyperparams& hp);

enum class InitMode {
  standard,
  // s becomes the exact SVD complement of the warm start instead of noise;
  // compose_w(init) then reproduces the per-task warm start whenever k covers
  // its rank. Used to sanity-check the initializer.
  diagnostic_svd,
};

// Per-task ridge warm start stacked into W0; l takes the top-k left singular
// directions of W0 scaled by sqrt(sigma) (noise at 1e-2 beyond the rank), and
// s is 1e-2 Gaussian noise keyed by task name. Deterministic in hp.seed and
// invariant to task order.
LatentModel init_model(const Dataset& ds, const Hyperparams& hp,
                       InitMode mode = InitMode::standard);

struct TrainResult {
  LatentModel model;
  TrainReport report;
};

// Alternating minimization: smoothed-prox s-step, then L1/Frobenius l-step,
// both warm-started from the current iterate, until the recorded objective's
// relative decrease falls below outer_tol. Recorded objectives never increase
// after an l-step; after an s-step they may exceed the previous value by at
// most mu times the smoothing gap bound.
TrainResult train(const Dataset& ds, const GroupPartition& partition, const Hyperparams& hp);

enum class CvMethod { mtl, lasso };

struct CvCell {
  double mu = 0.0;
  double gamma = 0.0;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct CvResult {
  double best_mu = 0.0;
  double best_gamma = 0.0;
  std::vector<CvCell> table;
  std::vector<std::string> warnings;
};

// Stratified k-fold selection over (mu, gamma) — or gamma alone for the
// lasso baseline. Tasks with fewer than `folds` positives or negatives keep
// their whole pool on the training side and do not contribute to scores
// (noted in warnings). Ties prefer the stronger penalty. threads > 1 runs
// fold/cell jobs concurrently; scores do not depend on the thread count.
CvResult cross_validate(const Dataset& ds, const GroupPartition& partition,
                        const std::vector<double>& mu_grid, const std::vector<double>& gamma_grid,
                        std::size_t folds, const Hyperparams& base_hp,
                        CvMethod method = CvMethod::mtl, std::size_t threads = 1);

}  // namespace attrmtl
