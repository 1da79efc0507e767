#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "attrmtl/matrix.hpp"

namespace attrmtl {

// One binary attribute and its training pool. Pools are attribute-specific;
// tasks built from a shared design matrix hold a reference to one backing
// Matrix instead of a copy.
class TaskData {
 public:
  TaskData() = default;
  TaskData(std::string name, Matrix x, std::vector<double> y)
      : name_(std::move(name)),
        x_(std::make_shared<Matrix>(std::move(x))),
        y_(std::move(y)) {}
  TaskData(std::string name, std::shared_ptr<const Matrix> x, std::vector<double> y)
      : name_(std::move(name)), x_(std::move(x)), y_(std::move(y)) {}

  const std::string& name() const { return name_; }
  const Matrix& x() const { return *x_; }
  const std::shared_ptr<const Matrix>& x_ptr() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  std::size_t n() const { return y_.size(); }

  // Mutable handles, used by validation fuzzers; the training pipeline
  // treats tasks as immutable once a Dataset is assembled.
  std::string& mutable_name() { return name_; }
  std::vector<double>& mutable_y() { return y_; }
  void set_x(Matrix x) { x_ = std::make_shared<Matrix>(std::move(x)); }

 private:
  std::string name_;
  std::shared_ptr<const Matrix> x_;
  std::vector<double> y_;
};

struct Dataset {
  std::vector<TaskData> tasks;
  std::size_t d = 0;  // shared feature dimension

  std::size_t num_tasks() const { return tasks.size(); }
  std::vector<std::string> task_names() const;

  // Task indices ordered by task name. Every cross-task reduction in the
  // solver stack iterates in this order, so training is bit-reproducible
  // under task reordering.
  std::vector<std::size_t> canonical_order() const;

  // One design matrix shared by all tasks; labels column m belongs to task m.
  static Dataset from_shared_features(Matrix x, const std::vector<std::string>& names,
                                      const Matrix& labels);
};

// Partition of task indices {0..M-1} into named groups.
struct GroupPartition {
  struct Group {
    std::string name;
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;

  std::size_t num_groups() const { return groups.size(); }
  std::size_t num_members() const;

  // Single group holding all m tasks.
  static GroupPartition all_in_one(std::size_t m, std::string name = "all");
  // g groups of near-equal size over contiguous task index ranges.
  static GroupPartition contiguous(std::size_t m, std::size_t g);
};

// Latent decomposition: every task weight vector is l * s-column.
struct LatentModel {
  Matrix l;  // d x k
  Matrix s;  // k x m
  std::vector<std::string> task_names;

  std::size_t d() const { return l.rows(); }
  std::size_t k() const { return l.cols(); }
  std::size_t num_tasks() const { return s.cols(); }
};

// Column m of the result is l * s^m.
Matrix compose_w(const LatentModel& model);

struct Hyperparams {
  double mu = 0.1;       // group-L21 weight on s
  double gamma = 0.05;   // L1 weight on l
  double lambda = 0.4;   // Frobenius weight on l
  std::size_t k = 0;     // latent dimension; 0 resolves to min(d, max(2m, 64))
  double nu = 0.0;       // smoothing scale; 0 resolves to inner_tol / (k*g)
  std::size_t outer_max = 50;
  double outer_tol = 1e-5;
  std::size_t inner_max = 500;
  double inner_tol = 1e-6;
  std::uint64_t seed = 42;

  bool squared_l21 = false;          // opt-in mu * Omega(s)^2 variant
  bool size_weighted_groups = false; // opt-in sqrt(|g|) block weights
  bool exact_s_step = false;         // exact-prox s-step instead of smoothing
  bool nu_decay = false;             // geometric nu decrease inside the s-step
};

std::size_t resolve_latent_dim(const Hyperparams& hp, const Dataset& ds);
double resolve_nu(const Hyperparams& hp, std::size_t k, std::size_t g);

struct ObjectiveTerms {
  double loss = 0.0;
  double group_l21 = 0.0;  // raw Omega(s), unweighted by mu, squared if the variant is on
  double l1 = 0.0;
  double frobenius = 0.0;
  double total = 0.0;
};

struct OuterIterRecord {
  double obj_after_s = 0.0;
  double obj_after_l = 0.0;
  ObjectiveTerms terms;
  std::size_t s_iters = 0;
  std::size_t l_iters = 0;
};

struct TrainReport {
  double obj_initial = 0.0;
  std::vector<OuterIterRecord> iters;
  bool converged = false;
  double wall_seconds = 0.0;
};

// Returns every violated invariant of the pair; empty means well-formed.
// Never throws on bad data.
std::vector<std::string> validate(const Dataset& ds, const GroupPartition& partition);

// Throws DataError unless the groups tile {0..m-1} exactly.
void require_partition_over(const GroupPartition& partition, std::size_t m, const char* what);

// validate + throw DataError listing the violations.
void require_valid(const Dataset& ds, const GroupPartition& partition);
void require_valid(const Hyperparams& hp);

}  // namespace attrmtl
