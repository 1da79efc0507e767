#pragma once

// Shared scaffolding for the unit and acceptance suites: random problem
// builders, finite-difference gradients, and deliberately naive reference
// implementations that share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"
#include "attrmtl/rng.hpp"

namespace testutil {

using attrmtl::Dataset;
using attrmtl::GroupPartition;
using attrmtl::Matrix;
using attrmtl::Rng;
using attrmtl::TaskData;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix a(rows, cols);
  for (double& v : a.data()) v = scale * rng.normal();
  return a;
}

// Gaussian features, labels from a random hyperplane with optional margin
// noise; every task gets its own pool so the dataset exercises the
// per-task-design code paths.
inline Dataset random_dataset(std::size_t d, std::size_t m, std::size_t n, std::uint64_t seed,
                              double flip = 0.0) {
  Dataset ds;
  ds.d = d;
  for (std::size_t t = 0; t < m; ++t) {
    const std::string name = "attr" + std::to_string(t);
    Rng rng = Rng::sub(seed, "test:" + name);
    Matrix x = random_matrix(n, d, rng);
    std::vector<double> w(d);
    for (double& v : w) v = rng.normal();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = attrmtl::dot(x.row(i), w);
      y[i] = s >= 0 ? 1.0 : -1.0;
      if (flip > 0 && rng.uniform() < flip) y[i] = -y[i];
    }
    ds.tasks.emplace_back(name, std::move(x), std::move(y));
  }
  return ds;
}

// Central finite differences of f over every entry of x.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix xp = x;
  auto xd = xp.data();
  auto gd = g.data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double save = xd[i];
    xd[i] = save + h;
    const double fp = f(xp);
    xd[i] = save - h;
    const double fm = f(xp);
    xd[i] = save;
    gd[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_rel_err(const Matrix& got, const Matrix& want) {
  double scale = std::max(1.0, attrmtl::max_abs(want));
  double worst = 0.0;
  auto a = got.data();
  auto b = want.data();
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  return worst;
}

// Naive re-implementation of the full objective: straightforward loops in
// storage order, no canonical ordering, no shared kernels.
inline double naive_objective(const Matrix& l, const Matrix& s, const Dataset& ds,
                              const GroupPartition& partition, double mu, double gamma,
                              double lambda, bool squared_l21 = false,
                              bool size_weighted = false) {
  double loss = 0.0;
  for (std::size_t m = 0; m < ds.num_tasks(); ++m) {
    const auto& task = ds.tasks[m];
    for (std::size_t i = 0; i < task.n(); ++i) {
      double score = 0.0;
      for (std::size_t dd = 0; dd < ds.d; ++dd) {
        double w = 0.0;
        for (std::size_t k = 0; k < l.cols(); ++k) w += l(dd, k) * s(k, m);
        score += task.x()(i, dd) * w;
      }
      const double slack = std::max(0.0, 1.0 - task.y()[i] * score);
      loss += 0.5 * slack * slack;
    }
  }
  double omega = 0.0;
  for (std::size_t k = 0; k < s.rows(); ++k) {
    for (const auto& g : partition.groups) {
      double nrm = 0.0;
      for (std::size_t t : g.members) nrm += s(k, t) * s(k, t);
      const double w = size_weighted ? std::sqrt(double(g.members.size())) : 1.0;
      omega += w * std::sqrt(nrm);
    }
  }
  if (squared_l21) omega *= omega;
  double l1 = 0.0, fro = 0.0;
  for (double v : l.data()) {
    l1 += std::abs(v);
    fro += v * v;
  }
  return loss + mu * omega + gamma * l1 + lambda * fro;
}

// 1-D oracle for the scalar soft threshold: minimizes 0.5*(z-v)^2 + t*|z| by
// golden-section search on a bracket that always contains the minimizer.
inline double prox_scalar_oracle(double v, double t) {
  auto f = [&](double z) { return 0.5 * (z - v) * (z - v) + t * std::abs(z); };
  double lo = std::min(0.0, v) - 1.0, hi = std::max(0.0, v) + 1.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) b = d; else a = c;
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return 0.5 * (a + b);
}

// 1-D oracle for the block soft threshold: the minimizer lies on the ray
// through v, so search the nonnegative radius r of z = r * v/||v||.
inline double prox_block_radius_oracle(double vnorm, double t) {
  auto f = [&](double r) { return 0.5 * (r - vnorm) * (r - vnorm) + t * r; };
  double a = 0.0, b = vnorm + 1.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) b = d; else a = c;
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return std::max(0.0, 0.5 * (a + b));
}

// Fresh scratch directory under the build tree; wiped at construction so
// reruns start clean.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("attrmtl_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  std::filesystem::path operator/(const std::string& leaf) const { return path / leaf; }
};

}  // namespace testutil
