#include "attrmtl/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "attrmtl/errors.hpp"

namespace attrmtl {
namespace {

// The penalty only equals the model objective term when the groups tile the
// task set, so reject anything else outright.
void check_partition(const GroupPartition& partition, std::size_t m, const char* what) {
  require_partition_over(partition, m, what);
}

double group_weight(const GroupPartition::Group& g, bool size_weighted) {
  return size_weighted ? std::sqrt(static_cast<double>(g.members.size())) : 1.0;
}

double block_norm(const Matrix& s, std::size_t k, const std::vector<std::size_t>& members) {
  double sq = 0.0;
  for (std::size_t t : members) sq += s(k, t) * s(k, t);
  return std::sqrt(sq);
}

}  // namespace

double group_l21_value(const Matrix& s, const GroupPartition& partition, bool size_weighted) {
  check_partition(partition, s.cols(), "group_l21_value");
  double value = 0.0;
  for (std::size_t k = 0; k < s.rows(); ++k)
    for (const auto& g : partition.groups)
      value += group_weight(g, size_weighted) * block_norm(s, k, g.members);
  return value;
}

Matrix prox_group_l21(const Matrix& v, double t, const GroupPartition& partition,
                      bool size_weighted) {
  check_partition(partition, v.cols(), "prox_group_l21");
  if (t < 0) throw DataError("prox_group_l21: negative threshold");
  Matrix z = v;
  for (std::size_t k = 0; k < v.rows(); ++k) {
    for (const auto& g : partition.groups) {
      const double norm = block_norm(v, k, g.members);
      const double thresh = t * group_weight(g, size_weighted);
      const double scale = norm > thresh ? 1.0 - thresh / norm : 0.0;
      for (std::size_t m : g.members) z(k, m) = scale * v(k, m);
    }
  }
  return z;
}

SmoothedPenalty smooth_group_l21(const Matrix& s, const GroupPartition& partition, double nu,
                                 bool size_weighted) {
  check_partition(partition, s.cols(), "smooth_group_l21");
  if (nu <= 0) throw DataError("smooth_group_l21: nu must be > 0");
  SmoothedPenalty out;
  out.nu = nu;
  out.gradient = Matrix(s.rows(), s.cols());
  double weight_sum = 0.0;
  for (const auto& g : partition.groups) weight_sum += group_weight(g, size_weighted);
  out.gap_bound = 0.5 * nu * static_cast<double>(s.rows()) * weight_sum;
  for (std::size_t k = 0; k < s.rows(); ++k) {
    for (const auto& g : partition.groups) {
      const double w = group_weight(g, size_weighted);
      const double norm = block_norm(s, k, g.members);
      if (norm <= nu) {
        out.value += w * norm * norm / (2.0 * nu);
      } else {
        out.value += w * (norm - 0.5 * nu);
      }
      const double denom = std::max(nu, norm);
      for (std::size_t m : g.members) out.gradient(k, m) = w * s(k, m) / denom;
    }
  }
  return out;
}

double l1_value(const Matrix& a) {
  double v = 0.0;
  for (double x : a.data()) v += std::abs(x);
  return v;
}

Matrix prox_l1(const Matrix& v, double t) {
  if (t < 0) throw DataError("prox_l1: negative threshold");
  Matrix z = v;
  for (double& x : z.data()) {
    if (x > t) {
      x -= t;
    } else if (x < -t) {
      x += t;
    } else {
      x = 0.0;
    }
  }
  return z;
}

double frobenius_sq(const Matrix& a) { return dot(a.data(), a.data()); }

Matrix frobenius_sq_grad(const Matrix& a) { return 2.0 * a; }

}  // namespace attrmtl
