#include <doctest.h>

#include <cmath>
#include <vector>

#include "attrmtl/baselines.hpp"
#include "attrmtl/errors.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/rng.hpp"
#include "helpers.hpp"

using namespace attrmtl;

TEST_CASE("lasso collapses to zero once gamma dominates the origin gradient") {
  Dataset ds = testutil::random_dataset(5, 3, 10, 110);
  Matrix g(5, 3);
  sqhinge_value_grad_w(Matrix(5, 3), ds, &g);
  const double gamma = 1.01 * max_abs(g);
  Matrix w = train_single_lasso(ds, gamma, SolverOpts{});
  CHECK(max_abs(w) == 0.0);
}

TEST_CASE("unregularized lasso separates separable data") {
  Dataset ds = testutil::random_dataset(6, 2, 20, 111);  // labels come from a hyperplane
  SolverOpts opts;
  opts.max_iter = 2000;
  Matrix w = train_single_lasso(ds, 0.0, opts);
  for (std::size_t m = 0; m < 2; ++m) {
    const TaskData& task = ds.tasks[m];
    std::vector<double> wm = col(w, m);
    for (std::size_t i = 0; i < task.n(); ++i) {
      const double s = dot(task.x().row(i), wm);
      CHECK(task.y()[i] * s > 0.0);
    }
  }
}

TEST_CASE("lasso columns are independent across tasks") {
  Dataset both = testutil::random_dataset(5, 2, 12, 112);
  Dataset solo;
  solo.d = 5;
  solo.tasks.push_back(both.tasks[1]);

  SolverOpts opts;
  Matrix w_both = train_single_lasso(both, 0.07, opts);
  Matrix w_solo = train_single_lasso(solo, 0.07, opts);
  for (std::size_t i = 0; i < 5; ++i) CHECK(w_both(i, 1) == w_solo(i, 0));
}

TEST_CASE("all-sharing l21 zeroes out under a huge penalty") {
  Dataset ds = testutil::random_dataset(5, 3, 10, 113);
  Matrix g(5, 3);
  sqhinge_value_grad_w(Matrix(5, 3), ds, &g);
  double worst_row = 0.0;
  for (std::size_t i = 0; i < 5; ++i) worst_row = std::max(worst_row, norm2(g.row(i)));
  Matrix w = train_l21_all(ds, 1.01 * worst_row, SolverOpts{});
  CHECK(max_abs(w) == 0.0);
}

TEST_CASE("single-task l21 coincides with the lasso at the same weight") {
  Dataset ds = testutil::random_dataset(6, 1, 15, 114);
  SolverOpts opts;
  opts.tol = 1e-10;
  opts.max_iter = 3000;
  Matrix a = train_l21_all(ds, 0.12, opts);
  Matrix b = train_single_lasso(ds, 0.12, opts);
  CHECK(max_abs(a - b) < 1e-7);
}

TEST_CASE("moderate l21 pressure produces exactly zero rows") {
  Dataset ds = testutil::random_dataset(8, 3, 14, 115, 0.1);
  SolverOpts opts;
  opts.max_iter = 2000;

  // Pitch mu between the weakest and strongest feature rows of the gradient
  // at the origin, so some rows must die and some must survive.
  Matrix g(8, 3);
  sqhinge_value_grad_w(Matrix(8, 3), ds, &g);
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const double r = norm2(g.row(i));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  Matrix w = train_l21_all(ds, 0.5 * (lo + hi), opts);
  std::size_t zero_rows = 0, nonzero_rows = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (norm2(w.row(i)) == 0.0)
      ++zero_rows;
    else
      ++nonzero_rows;
  }
  CHECK(zero_rows > 0);
  CHECK(nonzero_rows > 0);
}

TEST_CASE("ridge interpolates on an identity design as lambda vanishes") {
  const std::size_t d = 4;
  Matrix x = Matrix::identity(d);
  std::vector<double> y = {1, -1, 1, 1};
  Dataset ds;
  ds.d = d;
  ds.tasks.emplace_back("t", x, y);
  Matrix w = train_ridge(ds, 1e-10);
  for (std::size_t i = 0; i < d; ++i) CHECK(w(i, 0) == doctest::Approx(y[i]).epsilon(1e-8));

  Matrix w_big = train_ridge(ds, 1e10);
  CHECK(max_abs(w_big) < 1e-8);
}

TEST_CASE("ridge satisfies its normal equations") {
  Dataset ds = testutil::random_dataset(5, 2, 9, 116);
  const double lam = 0.7;
  Matrix w = train_ridge(ds, lam);
  for (std::size_t m = 0; m < 2; ++m) {
    const TaskData& task = ds.tasks[m];
    Matrix gram = matmul_at_b(task.x(), task.x());
    for (std::size_t i = 0; i < 5; ++i) gram(i, i) += lam;
    std::vector<double> lhs = matvec(gram, col(w, m));
    std::vector<double> rhs = matvec_t(task.x(), task.y());
    for (std::size_t i = 0; i < 5; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-9));
  }
}

TEST_CASE("ridge rejects non-positive regularization") {
  Dataset ds = testutil::random_dataset(3, 1, 5, 117);
  CHECK_THROWS_AS(train_ridge(ds, 0.0), DataError);
}

TEST_CASE("flat weights wrap into a latent model with an identity mix") {
  Rng rng(118);
  Matrix w = testutil::random_matrix(4, 3, rng);
  LatentModel m = as_latent(w, {"a", "b", "c"});
  CHECK(compose_w(m) == w);
  CHECK(m.k() == 3);
  CHECK_THROWS_AS(as_latent(w, {"a", "b"}), DataError);
}
