#include "attrmtl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "attrmtl/errors.hpp"
#include "attrmtl/linalg.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/regularizers.hpp"

namespace attrmtl {

Matrix train_single_lasso(const Dataset& ds, double gamma, const SolverOpts& opts) {
  if (gamma < 0) throw DataError("train_single_lasso: negative gamma");
  require_valid(ds, GroupPartition::all_in_one(ds.num_tasks()));
  Matrix w(ds.d, ds.num_tasks());
  const std::vector<double> bounds = task_spectral_bounds(ds);

  for (std::size_t m = 0; m < ds.num_tasks(); ++m) {
    const TaskData& task = ds.tasks[m];
    CompositeProblem p;
    p.smooth_value_grad = [&task](const Matrix& v, Matrix& g) {
      return sqhinge_task_value_grad(v.data(), task, g.data());
    };
    p.smooth_value = [&task](const Matrix& v) { return sqhinge_task_value(v.data(), task); };
    p.prox = [gamma](const Matrix& v, double step) { return prox_l1(v, step * gamma); };
    p.penalty = [gamma](const Matrix& v) { return gamma * l1_value(v); };

    SolverOpts o = opts;
    if (o.initial_step <= 0) o.initial_step = 1.0 / std::max(bounds[m], 1e-12);
    try {
      Matrix wm = fista(p, Matrix(ds.d, 1), o);
      for (std::size_t i = 0; i < ds.d; ++i) w(i, m) = wm(i, 0);
    } catch (const SolverError& e) {
      throw SolverError("train_single_lasso: task '" + task.name() + "': " + e.what());
    }
  }
  return w;
}

namespace {

double row_l21_value(const Matrix& w) {
  double v = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) v += norm2(w.row(i));
  return v;
}

Matrix prox_row_l21(const Matrix& v, double t) {
  Matrix z = v;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double n = norm2(v.row(i));
    const double scale = n > t ? 1.0 - t / n : 0.0;
    for (double& e : z.row(i)) e *= scale;
  }
  return z;
}

}  // namespace

Matrix train_l21_all(const Dataset& ds, double mu, const SolverOpts& opts) {
  if (mu < 0) throw DataError("train_l21_all: negative mu");
  require_valid(ds, GroupPartition::all_in_one(ds.num_tasks()));
  const std::vector<double> bounds = task_spectral_bounds(ds);
  double lip = 0.0;
  for (double b : bounds) lip = std::max(lip, b);

  CompositeProblem p;
  p.smooth_value_grad = [&ds](const Matrix& w, Matrix& g) {
    return sqhinge_value_grad_w(w, ds, &g);
  };
  p.smooth_value = [&ds](const Matrix& w) { return sqhinge_value_grad_w(w, ds, nullptr); };
  p.prox = [mu](const Matrix& v, double step) { return prox_row_l21(v, step * mu); };
  p.penalty = [mu](const Matrix& v) { return mu * row_l21_value(v); };

  SolverOpts o = opts;
  if (o.initial_step <= 0) o.initial_step = 1.0 / std::max(lip, 1e-12);
  return fista(p, Matrix(ds.d, ds.num_tasks()), o);
}

Matrix train_ridge(const Dataset& ds, double lambda_r) {
  if (lambda_r <= 0) throw DataError("train_ridge: lambda_r must be > 0");
  require_valid(ds, GroupPartition::all_in_one(ds.num_tasks()));
  Matrix w(ds.d, ds.num_tasks());

  // Gram matrices keyed by the backing feature matrix, so shared-design
  // datasets factor once.
  std::map<const Matrix*, Matrix> grams;
  for (std::size_t m = 0; m < ds.num_tasks(); ++m) {
    const TaskData& task = ds.tasks[m];
    auto it = grams.find(task.x_ptr().get());
    if (it == grams.end()) {
      Matrix gram = matmul_at_b(task.x(), task.x());
      for (std::size_t i = 0; i < ds.d; ++i) gram(i, i) += lambda_r;
      it = grams.emplace(task.x_ptr().get(), std::move(gram)).first;
    }
    std::vector<double> b = matvec_t(task.x(), task.y());
    try {
      std::vector<double> sol = cholesky_solve_spd(it->second, b);
      std::vector<double> back = matvec(it->second, sol);
      double rsq = 0.0, bsq = 0.0;
      for (std::size_t i = 0; i < ds.d; ++i) {
        const double r = back[i] - b[i];
        rsq += r * r;
        bsq += b[i] * b[i];
      }
      if (std::sqrt(rsq) > 1e-8 * std::max(1.0, std::sqrt(bsq)))
        throw SolverError("normal equations ill-conditioned (residual " + std::to_string(std::sqrt(rsq)) +
                          ")");
      for (std::size_t i = 0; i < ds.d; ++i) w(i, m) = sol[i];
    } catch (const SolverError& e) {
      throw SolverError("train_ridge: task '" + task.name() + "': " + e.what());
    }
  }
  return w;
}

LatentModel as_latent(const Matrix& w, std::vector<std::string> task_names) {
  if (w.cols() != task_names.size())
    throw DataError("as_latent: " + std::to_string(w.cols()) + " columns vs " +
                    std::to_string(task_names.size()) + " task names");
  LatentModel model;
  model.s = Matrix::identity(w.cols());
  model.l = w;
  model.task_names = std::move(task_names);
  return model;
}

}  // namespace attrmtl
