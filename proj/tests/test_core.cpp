#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "attrmtl/errors.hpp"
#include "attrmtl/linalg.hpp"
#include "attrmtl/matrix.hpp"
#include "attrmtl/rng.hpp"
#include "helpers.hpp"

using namespace attrmtl;

TEST_CASE("matrix constructor validates shape and finiteness") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DataError);
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), DataError);
  CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), DataError);
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(1, 2) == 6.0);
  CHECK(a.all_finite());
}

TEST_CASE("matrix product against a hand computation") {
  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 2, {5, 6, 7, 8});
  Matrix c = a * b;
  CHECK(c(0, 0) == 19.0);
  CHECK(c(0, 1) == 22.0);
  CHECK(c(1, 0) == 43.0);
  CHECK(c(1, 1) == 50.0);
  CHECK_THROWS_AS(a * Matrix(3, 2), DataError);
}

TEST_CASE("transpose forms and fused transposed products agree") {
  Rng rng(11);
  Matrix a = testutil::random_matrix(4, 3, rng);
  Matrix b = testutil::random_matrix(4, 5, rng);
  CHECK(transpose(transpose(a)) == a);
  CHECK(matmul_at_b(a, b) == transpose(a) * b);
  Matrix c = testutil::random_matrix(5, 3, rng);
  CHECK(matmul_a_bt(b, transpose(c)) == b * c);
}

TEST_CASE("matvec variants match the full product") {
  Rng rng(3);
  Matrix a = testutil::random_matrix(4, 6, rng);
  std::vector<double> x(6);
  for (double& v : x) v = rng.normal();
  Matrix xm(6, 1, x);
  Matrix want = a * xm;
  std::vector<double> got = matvec(a, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(want(i, 0)).epsilon(1e-14));

  std::vector<double> u(4);
  for (double& v : u) v = rng.normal();
  std::vector<double> gt = matvec_t(a, u);
  Matrix um(4, 1, u);
  Matrix wt = matmul_at_b(a, um);
  for (std::size_t i = 0; i < 6; ++i) CHECK(gt[i] == doctest::Approx(wt(i, 0)).epsilon(1e-14));
}

TEST_CASE("column access, dot, norms") {
  Matrix a(2, 2, {3, -4, 0, 5});
  std::vector<double> c0 = col(a, 0);
  CHECK(c0 == std::vector<double>{3, 0});
  set_col(a, 1, std::vector<double>{1, 2});
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 1) == 2.0);
  CHECK(max_abs(Matrix(2, 2, {1, -7, 2, 3})) == 7.0);
  CHECK(norm2(std::vector<double>{3, 4}) == doctest::Approx(5.0));
  CHECK(frobenius_norm(Matrix(1, 2, {3, 4})) == doctest::Approx(5.0));
  CHECK(dot(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == 11.0);
}

TEST_CASE("rng streams are deterministic and tag-keyed") {
  Rng a = Rng::sub(42, "stream");
  Rng b = Rng::sub(42, "stream");
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c = Rng::sub(42, "stream");
  Rng d = Rng::sub(42, "maerts");
  bool differ = false;
  for (int i = 0; i < 16; ++i) differ |= c.next_u64() != d.next_u64();
  CHECK(differ);
}

TEST_CASE("rng uniform stays in [0,1) and normal has sane moments") {
  Rng rng(7);
  double sum = 0, sumsq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("rng shuffle permutes and is seed-stable") {
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  Rng a(5);
  a.shuffle(v);
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == 20);

  std::vector<int> w(20);
  std::iota(w.begin(), w.end(), 0);
  Rng b(5);
  b.shuffle(w);
  CHECK(v == w);
}

TEST_CASE("svd of the identity") {
  SvdResult r = svd_thin(Matrix::identity(3));
  REQUIRE(r.sigma.size() == 3);
  for (double s : r.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd reconstructs a random matrix") {
  Rng rng(19);
  Matrix a = testutil::random_matrix(8, 5, rng);
  SvdResult r = svd_thin(a);
  REQUIRE(r.sigma.size() == 5);
  for (std::size_t i = 1; i < r.sigma.size(); ++i) CHECK(r.sigma[i - 1] >= r.sigma[i]);

  Matrix recon(8, 5);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double v = 0;
      for (std::size_t k = 0; k < 5; ++k) v += r.u(i, k) * r.sigma[k] * r.v(j, k);
      recon(i, j) = v;
    }
  CHECK(frobenius_norm(recon - a) <= 1e-10 * frobenius_norm(a));

  // Orthonormal columns and the documented sign convention.
  Matrix utu = matmul_at_b(r.u, r.u);
  Matrix vtv = matmul_at_b(r.v, r.v);
  CHECK(max_abs(utu - Matrix::identity(5)) < 1e-10);
  CHECK(max_abs(vtv - Matrix::identity(5)) < 1e-10);
  for (std::size_t k = 0; k < 5; ++k) {
    double big = 0, val = 0;
    for (std::size_t i = 0; i < 8; ++i)
      if (std::abs(r.u(i, k)) > big) {
        big = std::abs(r.u(i, k));
        val = r.u(i, k);
      }
    CHECK(val > 0.0);
  }
}

TEST_CASE("spectral norm squared bound lands in its stated window") {
  CHECK(spectral_norm_sq_bound(Matrix(3, 3)) == 0.0);
  double id = spectral_norm_sq_bound(Matrix::identity(4));
  CHECK(id >= 1.0);
  CHECK(id <= 1.05);
  Matrix d2(2, 2, {3, 0, 0, 1});
  double b = spectral_norm_sq_bound(d2);
  CHECK(b >= 9.0);
  CHECK(b <= 9.45);
}

TEST_CASE("cholesky solves SPD systems and rejects singular ones") {
  Matrix a(2, 2, {4, 1, 1, 3});
  std::vector<double> x = cholesky_solve_spd(a, std::vector<double>{1, 2});
  // Hand solution of [4 1; 1 3] x = [1; 2].
  CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));

  Matrix sing(2, 2, {1, 1, 1, 1});
  CHECK_THROWS_AS(cholesky_solve_spd(sing, std::vector<double>{1, 1}), SolverError);
}
