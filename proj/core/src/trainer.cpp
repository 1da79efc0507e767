#include "attrmtl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

#include "attrmtl/baselines.hpp"
#include "attrmtl/errors.hpp"
#include "attrmtl/linalg.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/optim.hpp"
#include "attrmtl/regularizers.hpp"
#include "attrmtl/rng.hpp"

namespace attrmtl {

ObjectiveTerms objective_terms(const Matrix& l, const Matrix& s, const Dataset& ds,
                               const GroupPartition& partition, const Hyperparams& hp) {
  ObjectiveTerms t;
  t.loss = sqhinge_value(l, s, ds);
  const double omega = group_l21_value(s, partition, hp.size_weighted_groups);
  t.group_l21 = hp.squared_l21 ? omega * omega : omega;
  t.l1 = l1_value(l);
  t.frobenius = frobenius_sq(l);
  t.total = t.loss + hp.mu * t.group_l21 + hp.gamma * t.l1 + hp.lambda * t.frobenius;
  return t;
}

double objective(const LatentModel& model, const Dataset& ds, const GroupPartition& partition,
                 const Hyperparams& hp) {
  return objective_terms(model.l, model.s, ds, partition, hp).total;
}

LatentModel init_model(const Dataset& ds, const Hyperparams& hp, InitMode mode) {
  require_valid(hp);
  require_valid(ds, GroupPartition::all_in_one(ds.num_tasks()));
  const std::size_t k = resolve_latent_dim(hp, ds);
  const std::size_t m = ds.num_tasks();
  constexpr double kRidge = 1.0;     // fixed warm-start regularizer
  constexpr double kNoise = 1e-2;

  Matrix w0 = train_ridge(ds, kRidge);

  // The SVD is taken over name-sorted columns; left singular vectors are then
  // independent of the order tasks arrived in.
  const std::vector<std::size_t> order = ds.canonical_order();
  Matrix w_sorted(ds.d, m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t i = 0; i < ds.d; ++i) w_sorted(i, p) = w0(i, order[p]);

  SvdResult svd = svd_thin(w_sorted);
  const double sig_tol =
      svd.sigma.empty() ? 0.0
                        : svd.sigma[0] * static_cast<double>(std::max(ds.d, m)) * 1e-12;

  LatentModel model;
  model.task_names = ds.task_names();
  model.l = Matrix(ds.d, k);
  for (std::size_t j = 0; j < k; ++j) {
    if (j < svd.sigma.size() && svd.sigma[j] > sig_tol) {
      const double scale = std::sqrt(svd.sigma[j]);
      for (std::size_t i = 0; i < ds.d; ++i) model.l(i, j) = scale * svd.u(i, j);
    } else {
      Rng rng = Rng::sub(hp.seed, "init:l:" + std::to_string(j));
      for (std::size_t i = 0; i < ds.d; ++i) model.l(i, j) = kNoise * rng.normal();
    }
  }

  model.s = Matrix(k, m);
  if (mode == InitMode::diagnostic_svd) {
    for (std::size_t j = 0; j < k && j < svd.sigma.size(); ++j) {
      if (svd.sigma[j] <= sig_tol) continue;
      const double scale = std::sqrt(svd.sigma[j]);
      for (std::size_t p = 0; p < m; ++p) model.s(j, order[p]) = scale * svd.v(p, j);
    }
  } else {
    for (std::size_t t = 0; t < m; ++t) {
      Rng rng = Rng::sub(hp.seed, "init:s:" + ds.tasks[t].name());
      for (std::size_t j = 0; j < k; ++j) model.s(j, t) = kNoise * rng.normal();
    }
  }
  return model;
}

namespace {

// Members sorted by task name, so every blockwise reduction downstream runs
// in a task-order-independent sequence.
GroupPartition canonical_partition(const GroupPartition& partition, const Dataset& ds) {
  GroupPartition canon = partition;
  for (auto& g : canon.groups) {
    std::sort(g.members.begin(), g.members.end(), [&ds](std::size_t a, std::size_t b) {
      return ds.tasks[a].name() < ds.tasks[b].name();
    });
  }
  return canon;
}

double smoothing_slack(const Hyperparams& hp, double nu, std::size_t k,
                       const GroupPartition& partition, double omega_before,
                       double omega_after) {
  double weight_sum = 0.0;
  for (const auto& g : partition.groups)
    weight_sum += hp.size_weighted_groups ? std::sqrt(static_cast<double>(g.members.size())) : 1.0;
  const double gap = 0.5 * nu * static_cast<double>(k) * weight_sum;
  if (!hp.squared_l21) return hp.mu * gap;
  // Omega^2 - Omega_nu^2 <= gap * (Omega + Omega_nu); bound it with the raw
  // values on both sides of the step.
  return hp.mu * gap * (omega_before + omega_after);
}

}  // namespace

TrainResult train(const Dataset& ds, const GroupPartition& partition, const Hyperparams& hp) {
  require_valid(ds, partition);
  require_valid(hp);
  const auto t0 = std::chrono::steady_clock::now();

  const GroupPartition canon = canonical_partition(partition, ds);
  const std::vector<double> bounds = task_spectral_bounds(ds);

  LatentModel model = init_model(ds, hp, InitMode::standard);
  const std::size_t k = model.k();
  const double nu = resolve_nu(hp, k, canon.num_groups());

  TrainResult out;
  ObjectiveTerms incumbent = objective_terms(model.l, model.s, ds, canon, hp);
  out.report.obj_initial = incumbent.total;
  double prev = out.report.obj_initial;

  SSolveOpts so;
  so.solver.max_iter = hp.inner_max;
  so.solver.tol = hp.inner_tol;
  so.squared_l21 = hp.squared_l21;
  so.size_weighted = hp.size_weighted_groups;
  so.nu_decay = hp.nu_decay;

  for (std::size_t outer = 0; outer < hp.outer_max; ++outer) {
    OuterIterRecord rec;
    const Matrix s_in = model.s;  // restored if the iteration fails to descend
    const Matrix l_in = model.l;

    // s-step
    SolveTrace st;
    const double omega_before = group_l21_value(model.s, canon, hp.size_weighted_groups);
    Matrix s_new = hp.exact_s_step
                       ? solve_s_exact(model.l, ds, canon, hp.mu, so, &model.s, &st, &bounds)
                       : solve_s_spg(model.l, ds, canon, hp.mu, nu, so, &model.s, &st, &bounds);
    ObjectiveTerms terms_s = objective_terms(model.l, s_new, ds, canon, hp);
    const double omega_after = group_l21_value(s_new, canon, hp.size_weighted_groups);
    const double slack =
        hp.exact_s_step ? 0.0 : smoothing_slack(hp, nu, k, canon, omega_before, omega_after);
    if (terms_s.total > prev + slack) {
      // Numerical stall: keep the incumbent rather than record an ascent.
      terms_s = incumbent;
    } else {
      model.s = std::move(s_new);
    }
    rec.obj_after_s = terms_s.total;
    rec.s_iters = st.iterations;

    // l-step
    SolveTrace lt;
    Matrix l_new = solve_l_apg(model.s, ds, hp.gamma, hp.lambda, so.solver, &model.l, &lt, &bounds);
    ObjectiveTerms terms_l = objective_terms(l_new, model.s, ds, canon, hp);
    if (terms_l.total > terms_s.total) {
      terms_l = terms_s;  // revert: warm-started descent makes this a stall
    } else {
      model.l = std::move(l_new);
    }
    if (terms_l.total > prev) {
      // The s-step spent its smoothing slack and the l-step could not win it
      // back. Restore the whole iterate so the after-l record never rises;
      // the relative-change test below then reads this as convergence.
      model.s = s_in;
      model.l = l_in;
      terms_l = incumbent;
    }
    incumbent = terms_l;
    rec.obj_after_l = terms_l.total;
    rec.l_iters = lt.iterations;
    rec.terms = terms_l;
    out.report.iters.push_back(rec);

    const double rel = std::abs(prev - terms_l.total) / std::max(1.0, std::abs(prev));
    prev = terms_l.total;
    if (rel <= hp.outer_tol) {
      out.report.converged = true;
      break;
    }
  }

  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.model = std::move(model);
  return out;
}

namespace {

struct FoldSplit {
  std::vector<Dataset> train;               // one dataset per fold
  std::vector<std::vector<TaskData>> val;   // [fold][task], empty pool when excluded
  std::vector<std::string> warnings;
};

TaskData subset_task(const TaskData& task, const std::vector<std::size_t>& rows) {
  Matrix x(rows.size(), task.x().cols());
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = task.x().row(rows[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
    y[i] = task.y()[rows[i]];
  }
  return TaskData(task.name(), std::move(x), std::move(y));
}

FoldSplit make_folds(const Dataset& ds, std::size_t folds, std::uint64_t seed) {
  FoldSplit split;
  split.train.assign(folds, Dataset{{}, ds.d});
  split.val.assign(folds, {});
  for (auto& v : split.val) v.resize(ds.num_tasks());

  for (std::size_t t = 0; t < ds.num_tasks(); ++t) {
    const TaskData& task = ds.tasks[t];
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < task.n(); ++i) (task.y()[i] > 0 ? pos : neg).push_back(i);

    if (pos.size() < folds || neg.size() < folds) {
      split.warnings.push_back("task '" + task.name() + "' kept out of validation: needs >= " +
                               std::to_string(folds) + " examples per class, has " +
                               std::to_string(pos.size()) + "+/" + std::to_string(neg.size()) +
                               "-");
      for (std::size_t f = 0; f < folds; ++f) {
        split.train[f].tasks.push_back(task);
        split.val[f][t] = TaskData(task.name(), Matrix(0, ds.d), {});
      }
      continue;
    }

    Rng rng = Rng::sub(seed, "cv:" + task.name());
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::size_t> fold_of(task.n());
    for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % folds;
    for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % folds;

    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> tr_rows, va_rows;
      for (std::size_t i = 0; i < task.n(); ++i) (fold_of[i] == f ? va_rows : tr_rows).push_back(i);
      split.train[f].tasks.push_back(subset_task(task, tr_rows));
      split.val[f][t] = subset_task(task, va_rows);
    }
  }
  return split;
}

double held_out_accuracy(const Matrix& w, const std::vector<TaskData>& val) {
  double acc_sum = 0.0;
  std::size_t scored = 0;
  std::vector<double> wm(w.rows());
  for (std::size_t m = 0; m < val.size(); ++m) {
    if (val[m].n() == 0) continue;
    for (std::size_t i = 0; i < w.rows(); ++i) wm[i] = w(i, m);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < val[m].n(); ++i) {
      const double score = dot(val[m].x().row(i), wm);
      const double pred = score >= 0.0 ? 1.0 : -1.0;
      if (pred == val[m].y()[i]) ++hits;
    }
    acc_sum += static_cast<double>(hits) / static_cast<double>(val[m].n());
    ++scored;
  }
  return scored ? acc_sum / static_cast<double>(scored) : 0.0;
}

}  // namespace

CvResult cross_validate(const Dataset& ds, const GroupPartition& partition,
                        const std::vector<double>& mu_grid, const std::vector<double>& gamma_grid,
                        std::size_t folds, const Hyperparams& base_hp, CvMethod method,
                        std::size_t threads) {
  require_valid(ds, partition);
  require_valid(base_hp);
  if (folds < 2) throw DataError("cross_validate: need at least 2 folds");
  if (gamma_grid.empty() || (method == CvMethod::mtl && mu_grid.empty()))
    throw DataError("cross_validate: empty hyperparameter grid");

  FoldSplit split = make_folds(ds, folds, base_hp.seed);

  CvResult result;
  result.warnings = split.warnings;
  for (double mu : (method == CvMethod::mtl ? mu_grid : std::vector<double>{0.0}))
    for (double gamma : gamma_grid)
      result.table.push_back({mu, gamma, 0.0, std::vector<double>(folds, 0.0)});

  auto run_cell_fold = [&](std::size_t cell, std::size_t fold) {
    const Dataset& tr = split.train[fold];
    Matrix w;
    if (method == CvMethod::mtl) {
      Hyperparams hp = base_hp;
      hp.mu = result.table[cell].mu;
      hp.gamma = result.table[cell].gamma;
      w = compose_w(train(tr, partition, hp).model);
    } else {
      SolverOpts opts;
      opts.max_iter = base_hp.inner_max;
      opts.tol = base_hp.inner_tol;
      w = train_single_lasso(tr, result.table[cell].gamma, opts);
    }
    return held_out_accuracy(w, split.val[fold]);
  };

  const std::size_t jobs = result.table.size() * folds;
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j)
      result.table[j / folds].fold_accuracy[j % folds] = run_cell_fold(j / folds, j % folds);
  } else {
    for (std::size_t start = 0; start < jobs; start += threads) {
      std::vector<std::future<double>> batch;
      const std::size_t end = std::min(jobs, start + threads);
      for (std::size_t j = start; j < end; ++j)
        batch.push_back(std::async(std::launch::async, run_cell_fold, j / folds, j % folds));
      for (std::size_t j = start; j < end; ++j)
        result.table[j / folds].fold_accuracy[j % folds] = batch[j - start].get();
    }
  }

  for (auto& cell : result.table) {
    cell.mean_accuracy = std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) /
                         static_cast<double>(folds);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    const auto& a = result.table[i];
    const auto& b = result.table[best];
    const bool better = a.mean_accuracy > b.mean_accuracy ||
                        (a.mean_accuracy == b.mean_accuracy &&
                         (a.mu > b.mu || (a.mu == b.mu && a.gamma > b.gamma)));
    if (better) best = i;
  }
  result.best_mu = result.table[best].mu;
  result.best_gamma = result.table[best].gamma;
  return result;
}

}  // namespace attrmtl
