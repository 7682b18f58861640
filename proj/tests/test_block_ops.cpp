#include <doctest.h>

#include <cstring>

#include "fastdoc/block_ops.hpp"
#include "fastdoc/rng.hpp"

using namespace fastdoc;

namespace {

Matrix random_spd(int n, Rng& rng) {
  Matrix m = rng.uniform_matrix(n, n);
  return Matrix(m * m.transpose()) + 0.2 * Matrix::Identity(n, n);
}

// Positive definite block tridiagonal built as F F^T from a block
// lower-bidiagonal F with nonsingular diagonal blocks.
BlockTriDiagMatrix random_pd_tridiag(const std::vector<int>& dims, Rng& rng) {
  const int m = static_cast<int>(dims.size());
  std::vector<Matrix> fd(static_cast<std::size_t>(m));
  std::vector<Matrix> fe(static_cast<std::size_t>(m > 0 ? m - 1 : 0));
  for (int r = 0; r < m; ++r) {
    Matrix t = rng.uniform_matrix(dims[static_cast<std::size_t>(r)],
                                  dims[static_cast<std::size_t>(r)]);
    t.triangularView<Eigen::StrictlyUpper>().setZero();
    for (int i = 0; i < dims[static_cast<std::size_t>(r)]; ++i)
      t(i, i) = 1.0 + std::abs(t(i, i));
    fd[static_cast<std::size_t>(r)] = t;
    if (r + 1 < m)
      fe[static_cast<std::size_t>(r)] = rng.uniform_matrix(
          dims[static_cast<std::size_t>(r) + 1], dims[static_cast<std::size_t>(r)]);
  }
  BlockTriDiagMatrix s;
  for (int r = 0; r < m; ++r) {
    Matrix d = fd[static_cast<std::size_t>(r)] * fd[static_cast<std::size_t>(r)].transpose();
    if (r > 0)
      d += fe[static_cast<std::size_t>(r) - 1] *
           fe[static_cast<std::size_t>(r) - 1].transpose();
    s.diag.push_back(0.5 * (d + d.transpose()));
    if (r + 1 < m)
      s.sub.push_back(fe[static_cast<std::size_t>(r)] *
                      fd[static_cast<std::size_t>(r)].transpose());
  }
  return s;
}

bool bitwise_equal(const BlockDiagMatrix& a, const BlockDiagMatrix& b) {
  if (a.block_count() != b.block_count()) return false;
  for (int i = 0; i < a.block_count(); ++i) {
    const Matrix& x = a.blocks[static_cast<std::size_t>(i)];
    const Matrix& y = b.blocks[static_cast<std::size_t>(i)];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(),
                    sizeof(double) * static_cast<std::size_t>(x.size())) != 0)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("blockdiag_inverse inverts hand-checked blocks") {
  BlockDiagMatrix h;
  Matrix b0(2, 2);
  b0 << 4, 2, 2, 5;
  h.blocks.push_back(b0);
  h.blocks.push_back(Matrix::Constant(1, 1, 2.0));

  for (FactorKind kind : {FactorKind::cholesky, FactorKind::lu}) {
    BlockDiagMatrix inv = blockdiag_inverse(h, kind);
    CHECK(inv.blocks[0](0, 0) == doctest::Approx(5.0 / 16.0).epsilon(1e-13));
    CHECK(inv.blocks[0](0, 1) == doctest::Approx(-1.0 / 8.0).epsilon(1e-13));
    CHECK(inv.blocks[0](1, 1) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(inv.blocks[1](0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  }
}

TEST_CASE("blockdiag_inverse matches dense inverse and is thread invariant") {
  Rng rng(5);
  BlockDiagMatrix h;
  for (int dims : {3, 1, 6, 4, 2, 5, 7, 3}) h.blocks.push_back(random_spd(dims, rng));

  BlockFactorStats stats1, stats4;
  BlockDiagMatrix inv1 =
      blockdiag_inverse(h, FactorKind::cholesky, RegPolicy(), 1, &stats1, true);
  BlockDiagMatrix inv4 =
      blockdiag_inverse(h, FactorKind::cholesky, RegPolicy(), 4, &stats4, true);
  CHECK(bitwise_equal(inv1, inv4));
  REQUIRE(stats1.entries.size() == 8);
  CHECK(stats1.total_flops() == stats4.total_flops());
  for (std::size_t i = 0; i < stats1.entries.size(); ++i) {
    CHECK(stats1.entries[i].dim == h.blocks[i].rows());
    CHECK(stats1.entries[i].shift == 0.0);
  }

  const Matrix dense_inv = h.to_dense().inverse();
  CHECK((inv1.to_dense() - dense_inv).cwiseAbs().maxCoeff() < 1e-10);

  BlockDiagMatrix inv_lu = blockdiag_inverse(h, FactorKind::lu);
  CHECK((inv_lu.to_dense() - dense_inv).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("blockdiag_inverse reports the failing block") {
  BlockDiagMatrix h;
  h.blocks.push_back(Matrix::Identity(2, 2));
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  h.blocks.push_back(bad);
  try {
    blockdiag_inverse(h);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.block_index == 1);
  }
}

TEST_CASE("blocktridiag_solve matches a dense solve on both routes") {
  Rng rng(42);
  const std::vector<int> dims{3, 5, 2, 4, 6, 1};
  BlockTriDiagMatrix s = random_pd_tridiag(dims, rng);
  s.validate();

  BlockColumn gamma;
  for (int d : dims) gamma.blocks.push_back(rng.uniform_matrix(d, 3));

  const Matrix dense = s.to_dense();
  const Matrix x_ref = dense.ldlt().solve(gamma.to_dense());

  BlockFactorStats stats;
  BlockColumn x_chol =
      blocktridiag_solve(s, gamma, FactorKind::cholesky, RegPolicy(), &stats, true);
  CHECK((x_chol.to_dense() - x_ref).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(stats.entries.size() == dims.size());
  for (std::size_t r = 0; r < dims.size(); ++r)
    CHECK(stats.entries[r].dim == dims[r]);

  BlockFactorStats stats_lu;
  BlockColumn x_lu =
      blocktridiag_solve(s, gamma, FactorKind::lu, RegPolicy(), &stats_lu, true);
  CHECK((x_lu.to_dense() - x_ref).cwiseAbs().maxCoeff() < 1e-9);

  // LU elimination costs about twice the Cholesky factor flops per block.
  CHECK(stats_lu.total_flops() > stats.total_flops());
}

TEST_CASE("blocktridiag_solve supports zero-size blocks") {
  Rng rng(7);
  const std::vector<int> dims{3, 0, 2};
  BlockTriDiagMatrix s = random_pd_tridiag(dims, rng);
  BlockColumn gamma;
  for (int d : dims) gamma.blocks.push_back(rng.uniform_matrix(d, 2));
  BlockColumn x = blocktridiag_solve(s, gamma);
  const Matrix x_ref = s.to_dense().ldlt().solve(gamma.to_dense());
  CHECK((x.to_dense() - x_ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("blocktridiag_solve validates shapes") {
  Rng rng(9);
  BlockTriDiagMatrix s = random_pd_tridiag({2, 3}, rng);
  BlockColumn gamma;
  gamma.blocks.push_back(rng.uniform_matrix(2, 1));
  CHECK_THROWS_AS(blocktridiag_solve(s, gamma), DimensionMismatch);

  gamma.blocks.push_back(rng.uniform_matrix(3, 1));
  s.sub[0] = rng.uniform_matrix(3, 1);  // wrong column count
  CHECK_THROWS_AS(blocktridiag_solve(s, gamma), DimensionMismatch);
}

TEST_CASE("psd estimates are exact on decoupled blocks") {
  BlockTriDiagMatrix s;
  Matrix d0(2, 2);
  d0 << 1, 0, 0, -2;
  s.diag.push_back(d0);
  s.diag.push_back(Matrix::Identity(3, 3) * 4.0);
  s.sub.push_back(Matrix::Zero(3, 2));
  const auto est = blocktridiag_schur_psd_estimates(s);
  REQUIRE(est.size() == 2);
  CHECK(est[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(est[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("psd estimates stay nonnegative for products F F^T") {
  Rng rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    BlockTriDiagMatrix s = random_pd_tridiag({4, 3, 5, 2, 4}, rng);
    double fro = 0.0;
    const Matrix dense = s.to_dense();
    fro = dense.norm();
    for (double e : blocktridiag_schur_psd_estimates(s))
      CHECK(e >= -1e-8 * fro);
  }
}
