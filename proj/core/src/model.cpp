#include "attrmtl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "attrmtl/errors.hpp"

namespace attrmtl {

std::vector<std::string> Dataset::task_names() const {
  std::vector<std::string> names;
  names.reserve(tasks.size());
  for (const auto& t : tasks) names.push_back(t.name());
  return names;
}

std::vector<std::size_t> Dataset::canonical_order() const {
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return tasks[a].name() < tasks[b].name();
  });
  return order;
}

Dataset Dataset::from_shared_features(Matrix x, const std::vector<std::string>& names,
                                      const Matrix& labels) {
  if (labels.rows() != x.rows())
    throw DataError("shared dataset: " + std::to_string(labels.rows()) + " label rows vs " +
                    std::to_string(x.rows()) + " feature rows");
  if (labels.cols() != names.size())
    throw DataError("shared dataset: " + std::to_string(labels.cols()) + " label columns vs " +
                    std::to_string(names.size()) + " task names");
  Dataset ds;
  ds.d = x.cols();
  auto shared = std::make_shared<const Matrix>(std::move(x));
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> y(shared->rows());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = labels(i, m);
    ds.tasks.emplace_back(names[m], shared, std::move(y));
  }
  return ds;
}

std::size_t GroupPartition::num_members() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

GroupPartition GroupPartition::all_in_one(std::size_t m, std::string name) {
  GroupPartition p;
  p.groups.push_back({std::move(name), {}});
  p.groups[0].members.resize(m);
  std::iota(p.groups[0].members.begin(), p.groups[0].members.end(), std::size_t{0});
  return p;
}

GroupPartition GroupPartition::contiguous(std::size_t m, std::size_t g) {
  if (g == 0 || g > m)
    throw DataError("contiguous partition: need 1 <= groups <= tasks, got " + std::to_string(g) +
                    " groups for " + std::to_string(m) + " tasks");
  GroupPartition p;
  std::size_t base = m / g, extra = m % g, next = 0;
  for (std::size_t i = 0; i < g; ++i) {
    GroupPartition::Group grp;
    grp.name = "group" + std::to_string(i);
    std::size_t size = base + (i < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) grp.members.push_back(next++);
    p.groups.push_back(std::move(grp));
  }
  return p;
}

Matrix compose_w(const LatentModel& model) { return model.l * model.s; }

std::size_t resolve_latent_dim(const Hyperparams& hp, const Dataset& ds) {
  std::size_t k = hp.k;
  if (k == 0) k = std::min(ds.d, std::max(2 * ds.num_tasks(), std::size_t{64}));
  if (k == 0) throw DataError("latent dimension resolved to 0 (empty dataset?)");
  if (k > ds.d)
    throw DataError("latent dimension " + std::to_string(k) + " exceeds feature dimension " +
                    std::to_string(ds.d));
  return k;
}

double resolve_nu(const Hyperparams& hp, std::size_t k, std::size_t g) {
  if (hp.nu > 0) return hp.nu;
  return hp.inner_tol / static_cast<double>(std::max<std::size_t>(1, k * g));
}

std::vector<std::string> validate(const Dataset& ds, const GroupPartition& partition) {
  std::vector<std::string> errs;
  if (ds.tasks.empty()) errs.push_back("dataset has no tasks");

  std::set<std::string> seen;
  for (std::size_t m = 0; m < ds.tasks.size(); ++m) {
    const auto& t = ds.tasks[m];
    const std::string tag = "task " + std::to_string(m) + " ('" + t.name() + "')";
    if (t.name().empty()) errs.push_back("task " + std::to_string(m) + " has an empty name");
    if (!seen.insert(t.name()).second) errs.push_back("duplicate task name '" + t.name() + "'");
    if (!t.x_ptr()) {
      errs.push_back(tag + " has no feature matrix");
      continue;
    }
    if (t.x().cols() != ds.d)
      errs.push_back(tag + " has " + std::to_string(t.x().cols()) + " features, dataset says " +
                     std::to_string(ds.d));
    if (t.x().rows() != t.y().size())
      errs.push_back(tag + " has " + std::to_string(t.x().rows()) + " feature rows but " +
                     std::to_string(t.y().size()) + " labels");
    if (!t.x().all_finite()) errs.push_back(tag + " has non-finite feature entries");
    for (std::size_t i = 0; i < t.y().size(); ++i) {
      if (t.y()[i] != 1.0 && t.y()[i] != -1.0) {
        std::ostringstream os;
        os << tag << " label " << i << " is " << t.y()[i] << ", want +1 or -1";
        errs.push_back(os.str());
        break;
      }
    }
  }

  const std::size_t m = ds.tasks.size();
  std::vector<std::size_t> owner(m, SIZE_MAX);
  for (std::size_t g = 0; g < partition.groups.size(); ++g) {
    const auto& grp = partition.groups[g];
    if (grp.members.empty()) errs.push_back("group '" + grp.name + "' is empty");
    for (std::size_t t : grp.members) {
      if (t >= m) {
        errs.push_back("group '" + grp.name + "' names task " + std::to_string(t) +
                       ", dataset has " + std::to_string(m));
      } else if (owner[t] != SIZE_MAX) {
        errs.push_back("overlapping groups: task " + std::to_string(t) + " is in '" +
                       partition.groups[owner[t]].name + "' and '" + grp.name + "'");
      } else {
        owner[t] = g;
      }
    }
  }
  for (std::size_t t = 0; t < m; ++t)
    if (owner[t] == SIZE_MAX) errs.push_back("uncovered task " + std::to_string(t));

  return errs;
}

void require_partition_over(const GroupPartition& partition, std::size_t m, const char* what) {
  std::vector<bool> owned(m, false);
  for (const auto& g : partition.groups) {
    for (std::size_t t : g.members) {
      if (t >= m)
        throw DataError(std::string(what) + ": group '" + g.name + "' names task " +
                        std::to_string(t) + " of " + std::to_string(m));
      if (owned[t])
        throw DataError(std::string(what) + ": overlapping groups at task " + std::to_string(t));
      owned[t] = true;
    }
  }
  for (std::size_t t = 0; t < m; ++t)
    if (!owned[t]) throw DataError(std::string(what) + ": uncovered task " + std::to_string(t));
}

void require_valid(const Dataset& ds, const GroupPartition& partition) {
  auto errs = validate(ds, partition);
  if (errs.empty()) return;
  std::string msg = "invalid dataset/partition:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw DataError(msg);
}

void require_valid(const Hyperparams& hp) {
  std::vector<std::string> errs;
  if (hp.mu < 0) errs.push_back("mu must be >= 0");
  if (hp.gamma < 0) errs.push_back("gamma must be >= 0");
  if (hp.lambda < 0) errs.push_back("lambda must be >= 0");
  if (hp.nu < 0) errs.push_back("nu must be >= 0");
  if (hp.outer_tol <= 0) errs.push_back("outer_tol must be > 0");
  if (hp.inner_tol <= 0) errs.push_back("inner_tol must be > 0");
  if (hp.outer_max == 0) errs.push_back("outer_max must be >= 1");
  if (hp.inner_max == 0) errs.push_back("inner_max must be >= 1");
  if (hp.squared_l21 && hp.exact_s_step)
    errs.push_back("squared_l21 has no exact prox; drop exact_s_step");
  if (errs.empty()) return;
  std::string msg = "invalid hyperparameters:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw DataError(msg);
}

}  // namespace attrmtl
