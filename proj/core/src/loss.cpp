#include "attrmtl/loss.hpp"

#include <string>
#include <vector>

#include "attrmtl/errors.hpp"

namespace attrmtl {
namespace {

void check_dims(const Matrix& l, const Matrix& s, const Dataset& ds) {
  if (l.rows() != ds.d)
    throw DataError("loss: l has " + std::to_string(l.rows()) + " rows, dataset dimension is " +
                    std::to_string(ds.d));
  if (l.cols() != s.rows())
    throw DataError("loss: l is " + std::to_string(l.rows()) + "x" + std::to_string(l.cols()) +
                    " but s has " + std::to_string(s.rows()) + " rows");
  if (s.cols() != ds.num_tasks())
    throw DataError("loss: s has " + std::to_string(s.cols()) + " columns for " +
                    std::to_string(ds.num_tasks()) + " tasks");
}

// Per-sample slack coefficients for one task: coef[i] = -xi_i * y_i with
// xi_i = max(0, 1 - y_i <w, x_i>). Returns the loss value.
double task_value_coefs(std::span<const double> w, const TaskData& task,
                        std::vector<double>* coefs) {
  const Matrix& x = task.x();
  const auto& y = task.y();
  if (coefs) coefs->assign(y.size(), 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double margin = y[i] * dot(x.row(i), w);
    const double xi = 1.0 - margin;
    if (xi > 0.0) {
      value += 0.5 * xi * xi;
      if (coefs) (*coefs)[i] = -xi * y[i];
    }
  }
  return value;
}

// grad += sum_i coef_i * x_i
void accumulate_rows(const Matrix& x, const std::vector<double>& coefs, std::span<double> grad) {
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (coefs[i] == 0.0) continue;
    const auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) grad[j] += coefs[i] * row[j];
  }
}

}  // namespace

double sqhinge_task_value(std::span<const double> w, const TaskData& task) {
  if (w.size() != task.x().cols())
    throw DataError("loss: weight length " + std::to_string(w.size()) + " vs " +
                    std::to_string(task.x().cols()) + " features in task '" + task.name() + "'");
  return task_value_coefs(w, task, nullptr);
}

double sqhinge_task_value_grad(std::span<const double> w, const TaskData& task,
                               std::span<double> grad) {
  if (w.size() != task.x().cols() || grad.size() != w.size())
    throw DataError("loss: weight/gradient length mismatch in task '" + task.name() + "'");
  std::vector<double> coefs;
  const double value = task_value_coefs(w, task, &coefs);
  std::fill(grad.begin(), grad.end(), 0.0);
  accumulate_rows(task.x(), coefs, grad);
  return value;
}

double sqhinge_value(const Matrix& l, const Matrix& s, const Dataset& ds) {
  check_dims(l, s, ds);
  double value = 0.0;
  std::vector<double> w(ds.d);
  for (std::size_t m : ds.canonical_order()) {
    matvec(l, col(s, m), w);
    value += task_value_coefs(w, ds.tasks[m], nullptr);
  }
  return value;
}

double sqhinge_value_grad_s(const Matrix& l, const Matrix& s, const Dataset& ds, Matrix& grad_s) {
  check_dims(l, s, ds);
  grad_s = Matrix(s.rows(), s.cols());
  double value = 0.0;
  std::vector<double> w(ds.d), gw(ds.d), gs(s.rows()), coefs;
  for (std::size_t m : ds.canonical_order()) {
    matvec(l, col(s, m), w);
    value += task_value_coefs(w, ds.tasks[m], &coefs);
    std::fill(gw.begin(), gw.end(), 0.0);
    accumulate_rows(ds.tasks[m].x(), coefs, gw);
    matvec_t(l, gw, gs);
    for (std::size_t k = 0; k < gs.size(); ++k) grad_s(k, m) = gs[k];
  }
  return value;
}

double sqhinge_value_grad_l(const Matrix& l, const Matrix& s, const Dataset& ds, Matrix& grad_l) {
  check_dims(l, s, ds);
  grad_l = Matrix(l.rows(), l.cols());
  double value = 0.0;
  std::vector<double> w(ds.d), gw(ds.d), coefs;
  for (std::size_t m : ds.canonical_order()) {
    matvec(l, col(s, m), w);
    value += task_value_coefs(w, ds.tasks[m], &coefs);
    std::fill(gw.begin(), gw.end(), 0.0);
    accumulate_rows(ds.tasks[m].x(), coefs, gw);
    // rank-one update gw * (s^m)^T
    for (std::size_t i = 0; i < ds.d; ++i) {
      if (gw[i] == 0.0) continue;
      for (std::size_t k = 0; k < l.cols(); ++k) grad_l(i, k) += gw[i] * s(k, m);
    }
  }
  return value;
}

double sqhinge_value_grad_w(const Matrix& w, const Dataset& ds, Matrix* grad_w) {
  if (w.rows() != ds.d || w.cols() != ds.num_tasks())
    throw DataError("loss: w is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                    ", want " + std::to_string(ds.d) + "x" + std::to_string(ds.num_tasks()));
  if (grad_w) *grad_w = Matrix(w.rows(), w.cols());
  double value = 0.0;
  std::vector<double> wm(ds.d), gw(ds.d), coefs;
  for (std::size_t m : ds.canonical_order()) {
    for (std::size_t i = 0; i < ds.d; ++i) wm[i] = w(i, m);
    if (!grad_w) {
      value += task_value_coefs(wm, ds.tasks[m], nullptr);
      continue;
    }
    value += task_value_coefs(wm, ds.tasks[m], &coefs);
    std::fill(gw.begin(), gw.end(), 0.0);
    accumulate_rows(ds.tasks[m].x(), coefs, gw);
    for (std::size_t i = 0; i < ds.d; ++i) (*grad_w)(i, m) = gw[i];
  }
  return value;
}

double sqhinge_total(const LatentModel& model, const Dataset& ds) {
  return sqhinge_value(model.l, model.s, ds);
}

Matrix sqhinge_grad_s(const LatentModel& model, const Dataset& ds) {
  Matrix g;
  sqhinge_value_grad_s(model.l, model.s, ds, g);
  return g;
}

Matrix sqhinge_grad_l(const LatentModel& model, const Dataset& ds) {
  Matrix g;
  sqhinge_value_grad_l(model.l, model.s, ds, g);
  return g;
}

}  // namespace attrmtl
