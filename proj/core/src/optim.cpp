#include "attrmtl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "attrmtl/errors.hpp"
#include "attrmtl/linalg.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/regularizers.hpp"

namespace attrmtl {
namespace {

constexpr double kStepGrowth = 1.25;
constexpr std::size_t kMaxBacktracks = 60;
// Stationarity certificate the exact s-solver refines toward.
constexpr double kKktTol = 1e-4;
constexpr std::size_t kKktRounds = 6;
// Relative slack in the line-search acceptance test; without it, roundoff in
// near-converged regimes (f(z) and its majorization agree to machine
// precision) can masquerade as a failed search.
constexpr double kAcceptSlack = 1e-12;

void axpy(double a, const Matrix& x, Matrix& y) {
  auto xd = x.data();
  auto yd = y.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += a * xd[i];
}

}  // namespace

Matrix fista(const CompositeProblem& problem, const Matrix& x0, const SolverOpts& opts,
             SolveTrace* trace) {
  if (!problem.smooth_value_grad || !problem.smooth_value || !problem.prox || !problem.penalty)
    throw DataError("fista: problem is missing a callable");
  if (x0.size() == 0) throw DataError("fista: empty start point");

  SolveTrace local;
  SolveTrace& tr = trace ? *trace : local;
  tr = SolveTrace{};

  if (!(opts.backtrack > 0.0 && opts.backtrack < 1.0))
    throw DataError("fista: backtrack factor must lie in (0,1)");

  Matrix x = x0;
  Matrix y = x0;
  Matrix grad(x0.rows(), x0.cols());
  double obj_x = problem.smooth_value(x) + problem.penalty(x);
  double step = opts.initial_step > 0 ? opts.initial_step : 1.0;
  double t = 1.0;
  tr.objectives.push_back(obj_x);

  // One prox step from (yy, f(yy), grad already filled), backtracking until
  // the quadratic majorization holds. Returns the point and its smooth value.
  auto prox_step = [&](const Matrix& yy, double fyy) {
    for (std::size_t bt = 0;; ++bt) {
      Matrix v = yy;
      axpy(-step, grad, v);
      Matrix z = problem.prox(v, step);
      Matrix dz = z - yy;
      const double lin = dot(grad.data(), dz.data());
      const double sq = dot(dz.data(), dz.data());
      const double quad = fyy + lin + sq / (2.0 * step);
      const double fz = problem.smooth_value(z);
      if (fz <= quad + kAcceptSlack * std::max(1.0, std::abs(quad)))
        return std::make_pair(std::move(z), fz);
      if (bt >= kMaxBacktracks)
        throw SolverError("fista: line search failed after " + std::to_string(kMaxBacktracks) +
                          " backtracks (step " + std::to_string(step) + ")");
      step *= opts.backtrack;
      ++tr.backtracks;
    }
  };

  std::size_t calm = 0;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    step *= kStepGrowth;
    double fy = problem.smooth_value_grad(y, grad);
    auto [z, fz] = prox_step(y, fy);
    double obj_z = fz + problem.penalty(z);

    if (opts.monotone && obj_z > obj_x) {
      // Momentum overshot; restart from the last accepted point. A plain
      // prox step from x cannot increase the objective, so this also fences
      // off line-search slack.
      t = 1.0;
      fy = problem.smooth_value_grad(x, grad);
      auto [zr, fzr] = prox_step(x, fy);
      obj_z = fzr + problem.penalty(zr);
      if (obj_z <= obj_x) {
        z = std::move(zr);
      } else {
        z = x;  // numerically stuck: stay put, let the window stop fire
        obj_z = obj_x;
      }
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z;
    const double mom = (t - 1.0) / t_next;
    if (mom != 0.0) {
      auto yd = y.data();
      auto zd = z.data();
      auto xd = x.data();
      for (std::size_t i = 0; i < yd.size(); ++i) yd[i] = zd[i] + mom * (zd[i] - xd[i]);
    }
    t = t_next;

    const double rel = std::abs(obj_x - obj_z) / std::max(1.0, std::abs(obj_x));
    x = std::move(z);
    obj_x = obj_z;
    tr.objectives.push_back(obj_x);
    tr.iterations = it;

    calm = rel <= opts.tol ? calm + 1 : 0;
    if (calm >= 3) {
      tr.converged = true;
      break;
    }
  }
  return x;
}

std::vector<double> task_spectral_bounds(const Dataset& ds) {
  std::vector<double> bounds(ds.num_tasks());
  std::map<const Matrix*, double> cache;
  for (std::size_t m = 0; m < ds.num_tasks(); ++m) {
    const Matrix* px = ds.tasks[m].x_ptr().get();
    auto it = cache.find(px);
    if (it == cache.end()) it = cache.emplace(px, spectral_norm_sq_bound(*px)).first;
    bounds[m] = it->second;
  }
  return bounds;
}

namespace {

double col_sq_norm(const Matrix& a, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
  return s;
}

double max_group_weight(const GroupPartition& partition, bool size_weighted) {
  if (!size_weighted) return 1.0;
  double w = 0.0;
  for (const auto& g : partition.groups)
    w = std::max(w, std::sqrt(static_cast<double>(g.members.size())));
  return w;
}

}  // namespace

Matrix solve_l_apg(const Matrix& s_fixed, const Dataset& ds, double gamma, double lambda,
                   const SolverOpts& opts, const Matrix* l0, SolveTrace* trace,
                   const std::vector<double>* x_sq_bounds) {
  if (gamma < 0 || lambda < 0) throw DataError("solve_l_apg: negative penalty weight");
  if (s_fixed.cols() != ds.num_tasks())
    throw DataError("solve_l_apg: s has " + std::to_string(s_fixed.cols()) + " columns for " +
                    std::to_string(ds.num_tasks()) + " tasks");
  const std::size_t k = s_fixed.rows();
  Matrix start = l0 ? *l0 : Matrix(ds.d, k);
  if (start.rows() != ds.d || start.cols() != k)
    throw DataError("solve_l_apg: warm start shape mismatch");

  std::vector<double> bounds = x_sq_bounds ? *x_sq_bounds : task_spectral_bounds(ds);
  double lip = 2.0 * lambda;
  for (std::size_t m = 0; m < ds.num_tasks(); ++m) lip += bounds[m] * col_sq_norm(s_fixed, m);

  SolverOpts o = opts;
  if (o.initial_step <= 0) o.initial_step = 1.0 / std::max(lip, 1e-12);

  CompositeProblem p;
  p.smooth_value_grad = [&](const Matrix& l, Matrix& g) {
    const double v = sqhinge_value_grad_l(l, s_fixed, ds, g);
    axpy(2.0 * lambda, l, g);
    return v + lambda * frobenius_sq(l);
  };
  p.smooth_value = [&](const Matrix& l) {
    return sqhinge_value(l, s_fixed, ds) + lambda * frobenius_sq(l);
  };
  p.prox = [&](const Matrix& v, double step) { return prox_l1(v, step * gamma); };
  p.penalty = [&](const Matrix& l) { return gamma * l1_value(l); };
  return fista(p, start, o, trace);
}

Matrix solve_s_spg(const Matrix& l_fixed, const Dataset& ds, const GroupPartition& partition,
                   double mu, double nu, const SSolveOpts& opts, const Matrix* s0,
                   SolveTrace* trace, const std::vector<double>* x_sq_bounds) {
  if (mu < 0) throw DataError("solve_s_spg: negative mu");
  if (nu <= 0) throw DataError("solve_s_spg: nu must be > 0");
  const std::size_t k = l_fixed.cols();
  const std::size_t m = ds.num_tasks();
  Matrix s = s0 ? *s0 : Matrix(k, m);
  if (s.rows() != k || s.cols() != m) throw DataError("solve_s_spg: warm start shape mismatch");

  std::vector<double> bounds = x_sq_bounds ? *x_sq_bounds : task_spectral_bounds(ds);
  const double l_bound = spectral_norm_sq_bound(l_fixed);
  double loss_lip = 0.0;
  for (double b : bounds) loss_lip = std::max(loss_lip, b);
  loss_lip *= l_bound;
  const double wmax = max_group_weight(partition, opts.size_weighted);

  // Geometric nu schedule when requested: each stage is solved to tolerance
  // and warm-starts the next, ending exactly at the target nu.
  std::vector<double> schedule;
  if (opts.nu_decay && nu < 1e-1) {
    for (double cur = 1e-1; cur > nu; cur *= 0.1) schedule.push_back(cur);
  }
  schedule.push_back(nu);

  SolveTrace local;
  SolveTrace& tr = trace ? *trace : local;
  std::size_t total_iters = 0, total_backtracks = 0;

  for (double nu_t : schedule) {
    CompositeProblem p;
    const bool squared = opts.squared_l21;
    p.smooth_value_grad = [&, nu_t, squared](const Matrix& st, Matrix& g) {
      double v = sqhinge_value_grad_s(l_fixed, st, ds, g);
      if (mu > 0) {
        SmoothedPenalty pen = smooth_group_l21(st, partition, nu_t, opts.size_weighted);
        if (squared) {
          v += mu * pen.value * pen.value;
          axpy(2.0 * mu * pen.value, pen.gradient, g);
        } else {
          v += mu * pen.value;
          axpy(mu, pen.gradient, g);
        }
      }
      return v;
    };
    p.smooth_value = [&, nu_t, squared](const Matrix& st) {
      double v = sqhinge_value(l_fixed, st, ds);
      if (mu > 0) {
        SmoothedPenalty pen = smooth_group_l21(st, partition, nu_t, opts.size_weighted);
        v += squared ? mu * pen.value * pen.value : mu * pen.value;
      }
      return v;
    };
    p.prox = [](const Matrix& v, double) { return v; };
    p.penalty = [](const Matrix&) { return 0.0; };

    double curv = loss_lip + mu * wmax / nu_t;
    if (squared && mu > 0) {
      // Chain-rule curvature scales with the current penalty value as well.
      SmoothedPenalty pen0 = smooth_group_l21(s, partition, nu_t, opts.size_weighted);
      curv = loss_lip + 2.0 * mu * (pen0.value / nu_t + dot(pen0.gradient.data(), pen0.gradient.data()));
    }
    SolverOpts o = opts.solver;
    if (o.initial_step <= 0) o.initial_step = 1.0 / std::max(curv, 1e-12);

    s = fista(p, s, o, &tr);
    total_iters += tr.iterations;
    total_backtracks += tr.backtracks;
  }
  tr.iterations = total_iters;
  tr.backtracks = total_backtracks;
  return s;
}

Matrix solve_s_exact(const Matrix& l_fixed, const Dataset& ds, const GroupPartition& partition,
                     double mu, const SSolveOpts& opts, const Matrix* s0, SolveTrace* trace,
                     const std::vector<double>* x_sq_bounds) {
  if (mu < 0) throw DataError("solve_s_exact: negative mu");
  if (opts.squared_l21)
    throw SolverError("solve_s_exact: the squared group penalty has no blockwise prox");
  const std::size_t k = l_fixed.cols();
  const std::size_t m = ds.num_tasks();
  Matrix start = s0 ? *s0 : Matrix(k, m);
  if (start.rows() != k || start.cols() != m)
    throw DataError("solve_s_exact: warm start shape mismatch");

  std::vector<double> bounds = x_sq_bounds ? *x_sq_bounds : task_spectral_bounds(ds);
  const double l_bound = spectral_norm_sq_bound(l_fixed);
  double loss_lip = 0.0;
  for (double b : bounds) loss_lip = std::max(loss_lip, b);
  loss_lip *= l_bound;

  SolverOpts o = opts.solver;
  if (o.initial_step <= 0) o.initial_step = 1.0 / std::max(loss_lip, 1e-12);

  CompositeProblem p;
  p.smooth_value_grad = [&](const Matrix& st, Matrix& g) {
    return sqhinge_value_grad_s(l_fixed, st, ds, g);
  };
  p.smooth_value = [&](const Matrix& st) { return sqhinge_value(l_fixed, st, ds); };
  p.prox = [&](const Matrix& v, double step) {
    return prox_group_l21(v, step * mu, partition, opts.size_weighted);
  };
  p.penalty = [&](const Matrix& st) {
    return mu * group_l21_value(st, partition, opts.size_weighted);
  };

  // Blockwise stationarity certificate at a candidate solution.
  Matrix g(k, m);
  auto certificate = [&](const Matrix& s) {
    sqhinge_value_grad_s(l_fixed, s, ds, g);
    double resid = 0.0;
    for (std::size_t kk = 0; kk < s.rows(); ++kk) {
      for (const auto& grp : partition.groups) {
        const double w =
            opts.size_weighted ? std::sqrt(static_cast<double>(grp.members.size())) : 1.0;
        double bn = 0.0, gn = 0.0;
        for (std::size_t t : grp.members) {
          bn += s(kk, t) * s(kk, t);
          gn += g(kk, t) * g(kk, t);
        }
        bn = std::sqrt(bn);
        if (bn == 0.0) {
          resid = std::max(resid, std::max(0.0, std::sqrt(gn) - mu * w));
        } else {
          double r = 0.0;
          for (std::size_t t : grp.members) {
            const double v = g(kk, t) + mu * w * s(kk, t) / bn;
            r += v * v;
          }
          resid = std::max(resid, std::sqrt(r));
        }
      }
    }
    return resid;
  };

  // Objective calm can fire before the subgradient residual is small, so keep
  // solving from the warm result with a tighter tolerance until certified.
  SolveTrace local;
  SolveTrace& tr = trace ? *trace : local;
  Matrix s = start;
  double resid = std::numeric_limits<double>::infinity();
  std::size_t iters = 0, backtracks = 0;
  for (std::size_t round = 0; round < kKktRounds && resid > kKktTol; ++round) {
    s = fista(p, s, o, &tr);
    iters += tr.iterations;
    backtracks += tr.backtracks;
    resid = certificate(s);
    o.tol *= 1e-3;
  }
  tr.iterations = iters;
  tr.backtracks = backtracks;
  tr.kkt_residual = resid;
  return s;
}

SubgradResult subgradient_oracle(
    const std::function<double(const Matrix&, Matrix&)>& value_subgrad, const Matrix& x0,
    std::size_t iters, double c) {
  if (!value_subgrad) throw DataError("subgradient_oracle: missing callable");
  if (c <= 0) throw DataError("subgradient_oracle: step constant must be > 0");
  Matrix x = x0;
  Matrix g(x0.rows(), x0.cols());
  SubgradResult best{x0, std::numeric_limits<double>::infinity()};
  for (std::size_t t = 1; t <= iters; ++t) {
    const double v = value_subgrad(x, g);
    if (v < best.best_objective) {
      best.best_objective = v;
      best.x = x;
    }
    axpy(-c / std::sqrt(static_cast<double>(t)), g, x);
  }
  return best;
}

}  // namespace attrmtl
