/*
 Copyright 2026 The FastDOC Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "fastdoc/block_ops.hpp"

#include <sstream>

#include "fastdoc/threads.hpp"

namespace fastdoc {

namespace {

void record(BlockFactorStats* stats, int index, int dim, std::uint64_t mults,
            std::uint64_t adds, double shift) {
  if (!stats) return;
  auto& e = stats->entries[static_cast<std::size_t>(index)];
  e.dim = dim;
  e.multiplies = mults;
  e.adds = adds;
  e.shift = shift;
}

}  // namespace

BlockDiagMatrix blockdiag_inverse(const BlockDiagMatrix& h, FactorKind kind,
                                  const RegPolicy& reg, int threads,
                                  BlockFactorStats* stats, bool count_flops) {
  const int m = h.block_count();
  BlockDiagMatrix out;
  out.blocks.resize(static_cast<std::size_t>(m));
  if (stats) stats->entries.assign(static_cast<std::size_t>(m), {});
  parallel_for(m, threads, [&](int i) {
    const Matrix& b = h.blocks[static_cast<std::size_t>(i)];
    try {
      if (kind == FactorKind::cholesky) {
        CholeskyFactor f = cholesky_factor(b, reg, count_flops);
        out.blocks[static_cast<std::size_t>(i)] = cholesky_inverse(f);
        record(stats, i, f.dim(), f.factor_multiplies, f.factor_adds,
               f.regularization_used);
      } else {
        LuFactor f = lu_factor(b, count_flops);
        out.blocks[static_cast<std::size_t>(i)] = lu_inverse(f);
        record(stats, i, f.dim(), f.factor_multiplies, f.factor_adds, 0.0);
      }
    } catch (NotPositiveDefinite& e) {
      throw NotPositiveDefinite(std::string(e.what()) + " (block " +
                                    std::to_string(i) + ")",
                                i);
    } catch (SingularSystem& e) {
      throw SingularSystem(std::string(e.what()) + " (block " + std::to_string(i) + ")",
                           i);
    }
  });
  return out;
}

BlockColumn blocktridiag_solve(const BlockTriDiagMatrix& s, const BlockColumn& gamma,
                               FactorKind kind, const RegPolicy& reg,
                               BlockFactorStats* stats, bool count_flops) {
  s.validate();
  const int m = s.block_count();
  if (gamma.block_count() != m)
    throw DimensionMismatch("blocktridiag_solve: rhs block count mismatch");
  for (int r = 0; r < m; ++r)
    if (gamma.blocks[static_cast<std::size_t>(r)].rows() !=
        s.diag[static_cast<std::size_t>(r)].rows())
      throw DimensionMismatch("blocktridiag_solve: rhs block " + std::to_string(r) +
                              " row count mismatch");
  BlockColumn x;
  x.blocks.resize(static_cast<std::size_t>(m));
  if (stats) stats->entries.assign(static_cast<std::size_t>(m), {});
  if (m == 0) return x;

  if (kind == FactorKind::cholesky) {
    // Forward sweep. Eliminating block row r leaves the trailing system with
    // diag[r+1] replaced by diag[r+1] - W^T W, where W = L_r^-1 sub[r]^T and
    // L_r is the Cholesky factor of the already-transformed block r. The
    // matching right-hand side update reuses Y_r = L_r^-1 rhs_r, so the
    // backward pass needs only one triangular solve per block.
    std::vector<Matrix> lower(static_cast<std::size_t>(m));
    std::vector<Matrix> w(static_cast<std::size_t>(m > 0 ? m - 1 : 0));
    std::vector<Matrix> y(static_cast<std::size_t>(m));
    Matrix q = s.diag[0];
    for (int r = 0; r < m; ++r) {
      CholeskyFactor f;
      try {
        f = cholesky_factor(q, reg, count_flops);
      } catch (NotPositiveDefinite& e) {
        throw NotPositiveDefinite(std::string(e.what()) + " (eliminated block " +
                                      std::to_string(r) + ")",
                                  r);
      }
      record(stats, r, f.dim(), f.factor_multiplies, f.factor_adds,
             f.regularization_used);
      lower[static_cast<std::size_t>(r)] = f.lower;
      Matrix yr = gamma.blocks[static_cast<std::size_t>(r)];
      if (r > 0)
        yr.noalias() -= w[static_cast<std::size_t>(r) - 1].transpose() *
                        y[static_cast<std::size_t>(r) - 1];
      f.lower.triangularView<Eigen::Lower>().solveInPlace(yr);
      y[static_cast<std::size_t>(r)] = std::move(yr);
      if (r + 1 < m) {
        Matrix wr = s.sub[static_cast<std::size_t>(r)].transpose();
        f.lower.triangularView<Eigen::Lower>().solveInPlace(wr);
        q = s.diag[static_cast<std::size_t>(r) + 1];
        q.selfadjointView<Eigen::Lower>().rankUpdate(wr.transpose(), -1.0);
        q.triangularView<Eigen::StrictlyUpper>() =
            q.transpose().triangularView<Eigen::StrictlyUpper>();
        w[static_cast<std::size_t>(r)] = std::move(wr);
      }
    }
    for (int r = m - 1; r >= 0; --r) {
      Matrix xr = std::move(y[static_cast<std::size_t>(r)]);
      if (r + 1 < m)
        xr.noalias() -= w[static_cast<std::size_t>(r)] *
                        x.blocks[static_cast<std::size_t>(r) + 1];
      lower[static_cast<std::size_t>(r)]
          .transpose()
          .triangularView<Eigen::Upper>()
          .solveInPlace(xr);
      x.blocks[static_cast<std::size_t>(r)] = std::move(xr);
    }
    return x;
  }

  // LU route: textbook elimination with a full solve per coupling update.
  std::vector<LuFactor> facts(static_cast<std::size_t>(m));
  std::vector<Matrix> gtil(static_cast<std::size_t>(m));
  Matrix q = s.diag[0];
  gtil[0] = gamma.blocks[0];
  for (int r = 0; r < m; ++r) {
    try {
      facts[static_cast<std::size_t>(r)] = lu_factor(q, count_flops);
    } catch (SingularSystem& e) {
      throw SingularSystem(std::string(e.what()) + " (eliminated block " +
                               std::to_string(r) + ")",
                           r);
    }
    const LuFactor& f = facts[static_cast<std::size_t>(r)];
    record(stats, r, f.dim(), f.factor_multiplies, f.factor_adds, 0.0);
    if (r + 1 < m) {
      const Matrix& sb = s.sub[static_cast<std::size_t>(r)];
      const Matrix t = lu_solve(f, sb.transpose());
      q = s.diag[static_cast<std::size_t>(r) + 1];
      q.noalias() -= sb * t;
      const Matrix z = lu_solve(f, gtil[static_cast<std::size_t>(r)]);
      gtil[static_cast<std::size_t>(r) + 1] =
          gamma.blocks[static_cast<std::size_t>(r) + 1] - sb * z;
    }
  }
  for (int r = m - 1; r >= 0; --r) {
    Matrix rhs = std::move(gtil[static_cast<std::size_t>(r)]);
    if (r + 1 < m)
      rhs.noalias() -= s.sub[static_cast<std::size_t>(r)].transpose() *
                       x.blocks[static_cast<std::size_t>(r) + 1];
    x.blocks[static_cast<std::size_t>(r)] =
        lu_solve(facts[static_cast<std::size_t>(r)], rhs);
  }
  return x;
}

std::vector<double> blocktridiag_schur_psd_estimates(const BlockTriDiagMatrix& s) {
  s.validate();
  const int m = s.block_count();
  std::vector<double> est(static_cast<std::size_t>(m), 0.0);
  if (m == 0) return est;
  Matrix q = s.diag[0];
  for (int r = 0; r < m; ++r) {
    const Matrix sym = 0.5 * (q + q.transpose());
    if (sym.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
      est[static_cast<std::size_t>(r)] = eig.eigenvalues().minCoeff();
    }
    if (r + 1 < m) {
      const Matrix& sb = s.sub[static_cast<std::size_t>(r)];
      LuFactor f;
      try {
        f = lu_factor(sym);
      } catch (SingularSystem& e) {
        throw SingularSystem(std::string(e.what()) + " (eliminated block " +
                                 std::to_string(r) + ")",
                             r);
      }
      q = s.diag[static_cast<std::size_t>(r) + 1];
      q.noalias() -= sb * lu_solve(f, sb.transpose());
    }
  }
  return est;
}

}  // namespace fastdoc
