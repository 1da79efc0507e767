#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

struct SolverOpts {
  std::size_t max_iter = 500;
  double tol = 1e-6;
  // Step size to start from; 0 lets the solver use its own curvature bound.
  double initial_step = 0.0;
  // Multiplier applied to the step whenever the line search rejects it.
  double backtrack = 0.5;
  // Enforce per-iteration descent of the composite objective (restart on
  // momentum overshoot, fall back to a plain prox step).
  bool monotone = true;
};

struct SolveTrace {
  std::vector<double> objectives;  // composite value, entry 0 is the start point
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t backtracks = 0;
  double kkt_residual = -1.0;  // filled by solve_s_exact, else -1
};

// min_x f(x) + h(x) with smooth f and prox-friendly h.
struct CompositeProblem {
  std::function<double(const Matrix&, Matrix&)> smooth_value_grad;  // returns f, fills grad
  std::function<double(const Matrix&)> smooth_value;
  std::function<Matrix(const Matrix&, double)> prox;  // prox of step*h at v
  std::function<double(const Matrix&)> penalty;       // h
};

// Accelerated proximal gradient with backtracking line search. Kept monotone
// by default, so recorded objectives never increase. Deterministic: same
// inputs give bit-identical iterates.
Matrix fista(const CompositeProblem& problem, const Matrix& x0, const SolverOpts& opts,
             SolveTrace* trace = nullptr);

struct SSolveOpts {
  SolverOpts solver;
  bool squared_l21 = false;
  bool size_weighted = false;
  bool nu_decay = false;  // geometric nu schedule down to the target, warm-started
};

// L-step of the alternation: min_l loss(l, s_fixed) + gamma*|l|_1 + lambda*|l|_F^2.
Matrix solve_l_apg(const Matrix& s_fixed, const Dataset& ds, double gamma, double lambda,
                   const SolverOpts& opts, const Matrix* l0 = nullptr, SolveTrace* trace = nullptr,
                   const std::vector<double>* x_sq_bounds = nullptr);

// S-step via Nesterov smoothing: min_s loss(l_fixed, s) + mu*Omega_nu(s),
// solved as a fully smooth problem. The returned point is within
// mu*gap_bound(nu) of the unsmoothed problem's optimum plus solver tolerance.
Matrix solve_s_spg(const Matrix& l_fixed, const Dataset& ds, const GroupPartition& partition,
                   double mu, double nu, const SSolveOpts& opts, const Matrix* s0 = nullptr,
                   SolveTrace* trace = nullptr, const std::vector<double>* x_sq_bounds = nullptr);

// S-step with the exact blockwise prox (valid because groups do not overlap).
// Certifies the answer via the blockwise KKT residual written to the trace.
Matrix solve_s_exact(const Matrix& l_fixed, const Dataset& ds, const GroupPartition& partition,
                     double mu, const SSolveOpts& opts, const Matrix* s0 = nullptr,
                     SolveTrace* trace = nullptr, const std::vector<double>* x_sq_bounds = nullptr);

// Plain subgradient descent with step c/sqrt(t), best iterate kept. Slow on
// purpose: it is the independent reference the accelerated solvers are
// checked against.
struct SubgradResult {
  Matrix x;
  double best_objective = 0.0;
};
SubgradResult subgradient_oracle(const std::function<double(const Matrix&, Matrix&)>& value_subgrad,
                                 const Matrix& x0, std::size_t iters, double c);

// sigma_max(X_m)^2 upper bounds per task; tasks sharing a design matrix share
// one power-iteration run.
std::vector<double> task_spectral_bounds(const Dataset& ds);

}  // namespace attrmtl
