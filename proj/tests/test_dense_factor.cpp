#include <doctest.h>

#include <Eigen/Dense>

#include "fastdoc/dense_factor.hpp"
#include "fastdoc/rng.hpp"

using namespace fastdoc;

namespace {

Matrix random_spd(int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m = rng.uniform_matrix(n, n);
  return Matrix(m * m.transpose()) + 0.1 * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("cholesky factor of a hand-checked 2x2") {
  Matrix m(2, 2);
  m << 4, 2, 2, 5;
  CholeskyFactor f = cholesky_factor(m);
  CHECK(f.lower(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.lower(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.lower(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.lower(0, 1) == 0.0);
  CHECK(f.regularization_used == 0.0);

  Matrix rhs(2, 1);
  rhs << 1, 0;
  Matrix x = cholesky_solve(f, rhs);
  CHECK(x(0, 0) == doctest::Approx(5.0 / 16.0).epsilon(1e-14));
  CHECK(x(1, 0) == doctest::Approx(-1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("cholesky of identity is identity") {
  CholeskyFactor f = cholesky_factor(Matrix::Identity(5, 5));
  CHECK((f.lower - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.regularization_used == 0.0);
}

TEST_CASE("cholesky inverse matches solve against identity") {
  const Matrix m = random_spd(9, 11);
  CholeskyFactor f = cholesky_factor(m);
  const Matrix inv_a = cholesky_inverse(f);
  const Matrix inv_b = cholesky_solve(f, Matrix::Identity(9, 9));
  CHECK((inv_a - inv_b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m * inv_a - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((inv_a - inv_a.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky rejects bad input") {
  CHECK_THROWS_AS(cholesky_factor(Matrix::Zero(2, 3)), DimensionMismatch);
  Matrix asym(2, 2);
  asym << 1, 2, 3, 1;
  CHECK_THROWS_AS(cholesky_factor(asym), DimensionMismatch);
}

TEST_CASE("indefinite matrix exhausts the shift policy") {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky_factor(m), NotPositiveDefinite);
}

TEST_CASE("shift policy rescues a slightly indefinite matrix") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1e-11;
  // trace/n ~ 0.5, so the first shift is 5e-11 and already clears the pivot.
  CholeskyFactor f = cholesky_factor(m);
  CHECK(f.regularization_used == doctest::Approx(5e-11).epsilon(1e-6));

  m(1, 1) = -1e-9;
  // First shift 5e-11 is not enough; one escalation by 100 is.
  CholeskyFactor g = cholesky_factor(m);
  CHECK(g.regularization_used == doctest::Approx(5e-9).epsilon(1e-6));

  CHECK_THROWS_AS(cholesky_factor(m, RegPolicy::none()), NotPositiveDefinite);
}

TEST_CASE("factorization flop tallies match the closed forms") {
  const int n = 8;
  const Matrix m = random_spd(n, 3);
  CholeskyFactor f = cholesky_factor(m, RegPolicy(), /*count_flops=*/true);
  const std::uint64_t nn = static_cast<std::uint64_t>(n);
  CHECK(f.factor_multiplies == nn * (nn + 1) * (nn + 2) / 6);
  CHECK(f.factor_adds == (nn - 1) * nn * (nn + 1) / 6);

  LuFactor lf = lu_factor(m, /*count_flops=*/true);
  CHECK(lf.factor_multiplies == nn * (nn - 1) / 2 + (nn - 1) * nn * (2 * nn - 1) / 6);
  CHECK(lf.factor_adds == (nn - 1) * nn * (2 * nn - 1) / 6);

  // Counting off by default.
  CHECK(cholesky_factor(m).factor_flops() == 0);
  CHECK(lu_factor(m).factor_flops() == 0);

  // Leading terms: n^3/3 and 2n^3/3 within the O(n^2) slack.
  const double n3 = static_cast<double>(n) * n * n;
  CHECK(static_cast<double>(f.factor_flops()) ==
        doctest::Approx(n3 / 3.0).epsilon(0.25));
  CHECK(static_cast<double>(lf.factor_flops()) ==
        doctest::Approx(2.0 * n3 / 3.0).epsilon(0.25));
}

TEST_CASE("lu handles a permutation-requiring matrix") {
  Matrix m(2, 2);
  m << 0, 1, 2, 0;
  LuFactor f = lu_factor(m);
  Matrix inv = lu_inverse(f);
  CHECK(inv(0, 0) == doctest::Approx(0.0));
  CHECK(inv(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inv(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("lu matches a library solve on a random system") {
  Rng rng(17);
  const Matrix m = rng.uniform_matrix(12, 12);
  const Matrix rhs = rng.uniform_matrix(12, 3);
  LuFactor f = lu_factor(m);
  const Matrix x = lu_solve(f, rhs);
  const Matrix x_ref = Eigen::PartialPivLU<Matrix>(m).solve(rhs);
  CHECK((x - x_ref).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((m * x - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lu rejects singular and non-square input") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;  // third column identically zero
  CHECK_THROWS_AS(lu_factor(m), SingularSystem);
  CHECK_THROWS_AS(lu_factor(Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("zero-dimensional factorizations are no-ops") {
  CholeskyFactor f = cholesky_factor(Matrix(0, 0));
  CHECK(f.dim() == 0);
  CHECK(cholesky_solve(f, Matrix(0, 2)).cols() == 2);
  LuFactor lf = lu_factor(Matrix(0, 0));
  CHECK(lu_inverse(lf).size() == 0);
}
