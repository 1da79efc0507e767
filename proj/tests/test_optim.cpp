#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "attrmtl/errors.hpp"
#include "attrmtl/linalg.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/optim.hpp"
#include "attrmtl/regularizers.hpp"
#include "attrmtl/rng.hpp"
#include "helpers.hpp"

using namespace attrmtl;

namespace {

CompositeProblem shifted_quadratic(const Matrix& b) {
  CompositeProblem p;
  p.smooth_value_grad = [b](const Matrix& x, Matrix& g) {
    g = x - b;
    return 0.5 * frobenius_sq(g);
  };
  p.smooth_value = [b](const Matrix& x) {
    Matrix d = x - b;
    return 0.5 * frobenius_sq(d);
  };
  p.prox = [](const Matrix& v, double) { return v; };
  p.penalty = [](const Matrix&) { return 0.0; };
  return p;
}

struct SmallInstance {
  Dataset ds;
  GroupPartition part;
  Matrix l;
  std::size_t k;
};

SmallInstance make_instance(std::uint64_t seed, std::size_t d = 6, std::size_t m = 4,
                            std::size_t k = 3, std::size_t n = 12) {
  SmallInstance inst;
  inst.ds = testutil::random_dataset(d, m, n, seed);
  inst.part = GroupPartition::contiguous(m, 2);
  Rng rng(seed + 1);
  inst.l = testutil::random_matrix(d, k, rng, 0.5);
  inst.k = k;
  return inst;
}

double s_objective(const Matrix& l, const Matrix& s, const Dataset& ds, const GroupPartition& p,
                   double mu) {
  return sqhinge_value(l, s, ds) + mu * group_l21_value(s, p);
}

}  // namespace

TEST_CASE("fista on a shifted quadratic walks to the shift") {
  Matrix b(2, 2, {1, -2, 3, 0.5});
  SolveTrace tr;
  Matrix x = fista(shifted_quadratic(b), Matrix(2, 2), SolverOpts{}, &tr);
  CHECK(max_abs(x - b) < 1e-5);
  CHECK(tr.converged);
}

TEST_CASE("fista solves the scalar lasso fixed point") {
  // min 0.5*(x-3)^2 + |x| has the soft-threshold solution x = 2.
  CompositeProblem p;
  p.smooth_value_grad = [](const Matrix& x, Matrix& g) {
    g(0, 0) = x(0, 0) - 3.0;
    return 0.5 * g(0, 0) * g(0, 0);
  };
  p.smooth_value = [](const Matrix& x) { return 0.5 * (x(0, 0) - 3.0) * (x(0, 0) - 3.0); };
  p.prox = [](const Matrix& v, double t) { return prox_l1(v, t); };
  p.penalty = [](const Matrix& x) { return l1_value(x); };
  Matrix x = fista(p, Matrix(1, 1), SolverOpts{}, nullptr);
  CHECK(x(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("fista reaches a long-run unaccelerated reference on a quadratic plus L1") {
  Rng rng(51);
  Matrix m = testutil::random_matrix(3, 3, rng);
  Matrix a = matmul_at_b(m, m);
  for (std::size_t i = 0; i < 3; ++i) a(i, i) += 1.0;  // strong convexity
  Matrix b = testutil::random_matrix(3, 1, rng);
  const double gamma = 0.3;

  auto value = [&](const Matrix& x) {
    Matrix ax = a * x;
    return 0.5 * dot(x.data(), ax.data()) - dot(b.data(), x.data());
  };
  CompositeProblem p;
  p.smooth_value_grad = [&](const Matrix& x, Matrix& g) {
    g = a * x - b;
    return value(x);
  };
  p.smooth_value = value;
  p.prox = [&](const Matrix& v, double t) { return prox_l1(v, t * gamma); };
  p.penalty = [&](const Matrix& x) { return gamma * l1_value(x); };

  SolverOpts opts;
  opts.tol = 1e-12;
  opts.max_iter = 5000;
  Matrix x = fista(p, Matrix(3, 1), opts, nullptr);

  // Plain proximal gradient with a conservative fixed step, run far past any
  // practical budget.
  const double step = 1.0 / spectral_norm_sq_bound(m) / 2.0;
  Matrix ref(3, 1);
  Matrix g(3, 1);
  for (int it = 0; it < 1000000; ++it) {
    g = a * ref - b;
    Matrix v = ref;
    auto vd = v.data();
    auto gd = g.data();
    for (std::size_t i = 0; i < 3; ++i) vd[i] -= step * gd[i];
    ref = prox_l1(v, step * gamma);
  }
  const double got = value(x) + gamma * l1_value(x);
  const double want = value(ref) + gamma * l1_value(ref);
  CHECK(std::abs(got - want) < 1e-8);
}

TEST_CASE("monotone trace never increases and runs are bit-identical") {
  SmallInstance inst = make_instance(61);
  SSolveOpts opts;
  SolveTrace tr;
  Matrix s1 = solve_s_spg(inst.l, inst.ds, inst.part, 0.2, 1e-4, opts, nullptr, &tr);
  REQUIRE(tr.objectives.size() >= 2);
  for (std::size_t i = 1; i < tr.objectives.size(); ++i)
    CHECK(tr.objectives[i] <= tr.objectives[i - 1]);

  Matrix s2 = solve_s_spg(inst.l, inst.ds, inst.part, 0.2, 1e-4, opts, nullptr, nullptr);
  CHECK(s1 == s2);
}

TEST_CASE("a poisoned objective exhausts the line search") {
  // Candidate values come back NaN, so no step ever satisfies the
  // majorization test and the backtrack cap has to fire.
  CompositeProblem p;
  p.smooth_value_grad = [](const Matrix& x, Matrix& g) {
    g(0, 0) = 2.0 * x(0, 0);
    return x(0, 0) * x(0, 0);
  };
  p.smooth_value = [](const Matrix&) { return std::numeric_limits<double>::quiet_NaN(); };
  p.prox = [](const Matrix& v, double) { return v; };
  p.penalty = [](const Matrix&) { return 0.0; };
  Matrix x0(1, 1, {1.0});
  CHECK_THROWS_AS(fista(p, x0, SolverOpts{}, nullptr), SolverError);
}

TEST_CASE("backtrack factor is validated") {
  Matrix b(1, 1, {1.0});
  SolverOpts opts;
  opts.backtrack = 1.0;
  CHECK_THROWS_AS(fista(shifted_quadratic(b), Matrix(1, 1), opts, nullptr), DataError);
}

TEST_CASE("l-step returns zero for all-zero features") {
  Dataset ds;
  ds.d = 4;
  ds.tasks.emplace_back("a", Matrix(5, 4), std::vector<double>(5, 1.0));
  ds.tasks.emplace_back("b", Matrix(5, 4), std::vector<double>(5, -1.0));
  Matrix s(2, 2, {1, 0, 0, 1});
  Matrix l = solve_l_apg(s, ds, 0.1, 0.4, SolverOpts{});
  CHECK(max_abs(l) == 0.0);
}

TEST_CASE("l-step stays at the origin when gamma dominates the gradient") {
  SmallInstance inst = make_instance(62);
  Rng rng(63);
  Matrix s = testutil::random_matrix(inst.k, inst.ds.num_tasks(), rng, 0.5);
  Matrix g(inst.ds.d, inst.k);
  sqhinge_value_grad_l(Matrix(inst.ds.d, inst.k), s, inst.ds, g);
  const double gamma = 1.01 * max_abs(g);
  Matrix l = solve_l_apg(s, inst.ds, gamma, 0.4, SolverOpts{});
  CHECK(max_abs(l) == 0.0);
}

TEST_CASE("spg with mu = 0 matches the exact solver") {
  SmallInstance inst = make_instance(64);
  SSolveOpts opts;
  opts.solver.tol = 1e-10;
  opts.solver.max_iter = 2000;
  Matrix s_spg = solve_s_spg(inst.l, inst.ds, inst.part, 0.0, 1e-4, opts);
  Matrix s_ex = solve_s_exact(inst.l, inst.ds, inst.part, 0.0, opts);
  double o1 = s_objective(inst.l, s_spg, inst.ds, inst.part, 0.0);
  double o2 = s_objective(inst.l, s_ex, inst.ds, inst.part, 0.0);
  CHECK(std::abs(o1 - o2) < 1e-6);
}

TEST_CASE("huge mu drives the combination matrix into the smoothing ball") {
  SmallInstance inst = make_instance(65);
  Matrix g(inst.k, inst.ds.num_tasks());
  sqhinge_value_grad_s(inst.l, Matrix(inst.k, inst.ds.num_tasks()), inst.ds, g);
  const double mu = 50.0 * std::max(1.0, max_abs(g));
  const double nu = 1e-5;
  SSolveOpts opts;
  Matrix s = solve_s_spg(inst.l, inst.ds, inst.part, mu, nu, opts);
  CHECK(frobenius_norm(s) < 1e-4);

  Matrix s_ex = solve_s_exact(inst.l, inst.ds, inst.part, mu, opts);
  CHECK(max_abs(s_ex) == 0.0);
}

TEST_CASE("smoothed and exact s-solvers sandwich each other") {
  for (std::uint64_t seed : {66, 67, 68}) {
    SmallInstance inst = make_instance(seed);
    const double mu = 0.3;
    const double nu = 1e-4;
    const std::size_t g = inst.part.num_groups();
    SSolveOpts opts;
    opts.solver.tol = 1e-9;
    opts.solver.max_iter = 3000;

    SolveTrace tr;
    Matrix s_spg = solve_s_spg(inst.l, inst.ds, inst.part, mu, nu, opts);
    Matrix s_ex = solve_s_exact(inst.l, inst.ds, inst.part, mu, opts, nullptr, &tr);
    CHECK(tr.kkt_residual >= 0.0);
    CHECK(tr.kkt_residual <= 1e-4);

    double o_spg = s_objective(inst.l, s_spg, inst.ds, inst.part, mu);
    double o_ex = s_objective(inst.l, s_ex, inst.ds, inst.part, mu);
    const double slack = mu * nu * double(inst.k) * double(g) / 2.0 + 1e-6;
    CHECK(o_ex <= o_spg + 1e-7 * std::max(1.0, std::abs(o_spg)));
    CHECK(o_spg <= o_ex + slack);
  }
}

TEST_CASE("squared variant is rejected by the exact solver and solved by spg") {
  SmallInstance inst = make_instance(69);
  SSolveOpts opts;
  opts.squared_l21 = true;
  CHECK_THROWS_AS(solve_s_exact(inst.l, inst.ds, inst.part, 0.1, opts), SolverError);

  Matrix s = solve_s_spg(inst.l, inst.ds, inst.part, 0.1, 1e-4, opts);
  CHECK(s.all_finite());
  // The squared penalty still shrinks relative to the unpenalized solve.
  SSolveOpts plain;
  Matrix s0 = solve_s_spg(inst.l, inst.ds, inst.part, 0.0, 1e-4, plain);
  CHECK(group_l21_value(s, inst.part) < group_l21_value(s0, inst.part));
}

TEST_CASE("subgradient oracle closes in on a convex quadratic") {
  Rng rng(71);
  Matrix b = testutil::random_matrix(3, 1, rng);
  auto vg = [&](const Matrix& x, Matrix& g) {
    g = x - b;
    Matrix d = x - b;
    return 0.5 * frobenius_sq(d);
  };
  SubgradResult r = subgradient_oracle(vg, Matrix(3, 1), 100000, 1.0);
  CHECK(max_abs(r.x - b) < 1e-4);
}

TEST_CASE("subgradient oracle reproduces the scalar soft threshold") {
  auto vg = [](const Matrix& x, Matrix& g) {
    const double v = x(0, 0);
    g(0, 0) = (v - 3.0) + (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
    return 0.5 * (v - 3.0) * (v - 3.0) + std::abs(v);
  };
  SubgradResult r = subgradient_oracle(vg, Matrix(1, 1), 100000, 1.0);
  CHECK(r.x(0, 0) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("spectral bounds are shared across tasks with one design") {
  Matrix x(6, 3, {1, 0, 0, 0, 2, 0, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 1});
  Matrix labels(6, 2);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j) labels(i, j) = (i + j) % 2 ? 1.0 : -1.0;
  Dataset ds = Dataset::from_shared_features(x, {"a", "b"}, labels);
  std::vector<double> bounds = task_spectral_bounds(ds);
  REQUIRE(bounds.size() == 2);
  CHECK(bounds[0] == bounds[1]);

  SvdResult svd = svd_thin(x);
  const double sig_sq = svd.sigma[0] * svd.sigma[0];
  CHECK(bounds[0] >= sig_sq);
  CHECK(bounds[0] <= 1.05 * sig_sq);
}
