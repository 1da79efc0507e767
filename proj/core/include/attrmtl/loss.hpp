#pragma once

#include <span>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"

namespace attrmtl {

// Squared hinge over one task: sum_i 0.5 * max(0, 1 - y_i <w, x_i>)^2.
double sqhinge_task_value(std::span<const double> w, const TaskData& task);

// Same, also writing the gradient wrt w into grad (length d).
double sqhinge_task_value_grad(std::span<const double> w, const TaskData& task,
                               std::span<double> grad);

// Loss summed over all tasks with w^m = l * s^m. Tasks are reduced in
// canonical (name-sorted) order.
double sqhinge_value(const Matrix& l, const Matrix& s, const Dataset& ds);

// Value plus gradient wrt s (k x m) or wrt l (d x k).
double sqhinge_value_grad_s(const Matrix& l, const Matrix& s, const Dataset& ds, Matrix& grad_s);
double sqhinge_value_grad_l(const Matrix& l, const Matrix& s, const Dataset& ds, Matrix& grad_l);

// Joint loss straight in w-space (column m of w against task m), for the
// flat baselines. grad_w may be null when only the value is needed.
double sqhinge_value_grad_w(const Matrix& w, const Dataset& ds, Matrix* grad_w);

// Model-level wrappers.
double sqhinge_total(const LatentModel& model, const Dataset& ds);
Matrix sqhinge_grad_s(const LatentModel& model, const Dataset& ds);
Matrix sqhinge_grad_l(const LatentModel& model, const Dataset& ds);

}  // namespace attrmtl
