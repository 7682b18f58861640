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
#include "fastdoc/deriv.hpp"

#include <chrono>
#include <cmath>

namespace fastdoc {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

TrajectoryDerivatives structured_backward(const DiffKktSystem& sys, FactorKind kind,
                                          const RegPolicy& reg, BackwardStats* stats,
                                          bool count_flops) {
  sys.validate();
  const int n_stage = sys.stage_count();
  const int n_rows = sys.row_block_count();
  TrajectoryDerivatives out;

  const auto t0 = Clock::now();
  BlockDiagMatrix hinv;
  try {
    hinv = blockdiag_inverse(sys.hessian, kind, reg, /*threads=*/1,
                             stats ? &stats->step1 : nullptr, count_flops);
  } catch (NotPositiveDefinite& e) {
    throw NotPositiveDefinite(e.what(), e.block_index, /*step=*/1);
  }
  const auto t1 = Clock::now();

  // Schur complement assembly. P[i] = A_{i,s} H_s^-1 (and the trailing-stage
  // partner when the row block couples two stages) is shared between the
  // diagonal of S, the coupling blocks, and Gamma.
  BlockTriDiagMatrix s;
  BlockColumn gamma;
  std::vector<Matrix> p_stage(static_cast<std::size_t>(n_rows));
  std::vector<Matrix> p_next(static_cast<std::size_t>(n_rows));
  s.diag.resize(static_cast<std::size_t>(n_rows));
  s.sub.resize(n_rows > 0 ? static_cast<std::size_t>(n_rows) - 1 : 0);
  gamma.blocks.resize(static_cast<std::size_t>(n_rows));
  for (int i = 0; i < n_rows; ++i) {
    const ConstraintRowBlock& r = sys.rows[static_cast<std::size_t>(i)];
    const std::size_t si = static_cast<std::size_t>(r.stage);
    p_stage[static_cast<std::size_t>(i)].noalias() = r.on_stage * hinv.blocks[si];
    Matrix d;
    d.noalias() = p_stage[static_cast<std::size_t>(i)] * r.on_stage.transpose();
    Matrix g;
    g.noalias() = p_stage[static_cast<std::size_t>(i)] * sys.param_cross[si];
    if (r.has_next()) {
      p_next[static_cast<std::size_t>(i)].noalias() = r.on_next * hinv.blocks[si + 1];
      d.noalias() += p_next[static_cast<std::size_t>(i)] * r.on_next.transpose();
      g.noalias() += p_next[static_cast<std::size_t>(i)] * sys.param_cross[si + 1];
    }
    s.diag[static_cast<std::size_t>(i)] = 0.5 * (d + d.transpose());
    gamma.blocks[static_cast<std::size_t>(i)] =
        g - sys.constraint_cross[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i + 1 < n_rows; ++i) {
    const ConstraintRowBlock& a = sys.rows[static_cast<std::size_t>(i)];
    const ConstraintRowBlock& b = sys.rows[static_cast<std::size_t>(i) + 1];
    Matrix c = Matrix::Zero(b.rows(), a.rows());
    if (b.stage == a.stage) {
      c.noalias() += b.on_stage * p_stage[static_cast<std::size_t>(i)].transpose();
      if (a.has_next() && b.has_next())
        c.noalias() += b.on_next * p_next[static_cast<std::size_t>(i)].transpose();
    } else if (b.stage == a.stage + 1 && a.has_next()) {
      c.noalias() += b.on_stage * p_next[static_cast<std::size_t>(i)].transpose();
    }
    s.sub[static_cast<std::size_t>(i)] = std::move(c);
  }
  const auto t2 = Clock::now();

  BlockColumn x;
  if (n_rows > 0) {
    try {
      x = blocktridiag_solve(s, gamma, kind, reg, stats ? &stats->step3 : nullptr,
                             count_flops);
    } catch (NotPositiveDefinite& e) {
      throw NotPositiveDefinite(e.what(), e.block_index, /*step=*/3);
    }
  }
  const auto t3 = Clock::now();

  out.dlambda_dtheta = x.to_dense();
  out.dxi_dtheta.resize(sys.total_primal(), sys.n_theta);
  std::vector<Matrix> rhs(static_cast<std::size_t>(n_stage));
  for (int k = 0; k < n_stage; ++k)
    rhs[static_cast<std::size_t>(k)] = -sys.param_cross[static_cast<std::size_t>(k)];
  for (int i = 0; i < n_rows; ++i) {
    const ConstraintRowBlock& r = sys.rows[static_cast<std::size_t>(i)];
    const Matrix& xi = x.blocks[static_cast<std::size_t>(i)];
    rhs[static_cast<std::size_t>(r.stage)].noalias() += r.on_stage.transpose() * xi;
    if (r.has_next())
      rhs[static_cast<std::size_t>(r.stage) + 1].noalias() +=
          r.on_next.transpose() * xi;
  }
  int off = 0;
  for (int k = 0; k < n_stage; ++k) {
    const int d = sys.stage_dim(k);
    out.dxi_dtheta.block(off, 0, d, sys.n_theta).noalias() =
        hinv.blocks[static_cast<std::size_t>(k)] * rhs[static_cast<std::size_t>(k)];
    off += d;
  }
  const auto t4 = Clock::now();

  out.breakdown.step1_ns = elapsed_ns(t0, t1);
  out.breakdown.step2_ns = elapsed_ns(t1, t2);
  out.breakdown.step3_ns = elapsed_ns(t2, t3);
  out.breakdown.step4_ns = elapsed_ns(t3, t4);
  out.breakdown.total_ns = elapsed_ns(t0, t4);
  return out;
}

}  // namespace

TrajectoryDerivatives fastdoc_backward(const DiffKktSystem& sys, const RegPolicy& reg,
                                       BackwardStats* stats, bool count_flops) {
  return structured_backward(sys, FactorKind::cholesky, reg, stats, count_flops);
}

TrajectoryDerivatives blocklu_backward(const DiffKktSystem& sys, BackwardStats* stats,
                                       bool count_flops) {
  return structured_backward(sys, FactorKind::lu, RegPolicy::none(), stats,
                             count_flops);
}

DenseKkt assemble_dense_kkt(const DiffKktSystem& sys) {
  sys.validate();
  const int np = sys.total_primal();
  const int nr = sys.total_constraint_rows();
  const int dim = np + nr;
  DenseKkt dk;
  dk.n_primal = np;
  dk.n_theta = sys.n_theta;
  dk.kkt = Matrix::Zero(dim, dim);
  dk.kkt.topLeftCorner(np, np) = sys.hessian.to_dense();
  const Matrix a = sys.dense_jacobian();
  dk.kkt.bottomLeftCorner(nr, np) = a;
  dk.kkt.topRightCorner(np, nr) = a.transpose();
  dk.rhs.resize(dim, sys.n_theta);
  dk.rhs.topRows(np) = -sys.dense_param_cross();
  dk.rhs.bottomRows(nr) = -sys.dense_constraint_cross();
  return dk;
}

TrajectoryDerivatives dense_backward(const DenseKkt& dk) {
  const auto t0 = Clock::now();
  const int dim = static_cast<int>(dk.kkt.rows());
  const int np = dk.n_primal;
  const int nr = dim - np;

  Eigen::PartialPivLU<Matrix> lu(dk.kkt);
  const Vector u_diag = lu.matrixLU().diagonal().cwiseAbs();
  if (dim > 0) {
    const double dmin = u_diag.minCoeff();
    const double dmax = u_diag.maxCoeff();
    if (!(dmin > 0.0) || !std::isfinite(dmax) ||
        dmin < dmax * 1e-14 * static_cast<double>(dim) * 1e-2)
      throw SingularSystem("dense_backward: KKT matrix numerically singular");
  }
  const Matrix sol = lu.solve(dk.rhs);

  TrajectoryDerivatives out;
  out.dxi_dtheta = sol.topRows(np);
  out.dlambda_dtheta = -sol.bottomRows(nr);
  const auto t1 = Clock::now();
  out.breakdown.total_ns = elapsed_ns(t0, t1);
  return out;
}

TrajectoryDerivatives dense_backward(const DiffKktSystem& sys) {
  const auto t0 = Clock::now();
  const DenseKkt dk = assemble_dense_kkt(sys);
  TrajectoryDerivatives out = dense_backward(dk);
  const auto t1 = Clock::now();
  out.breakdown.total_ns = elapsed_ns(t0, t1);
  return out;
}

std::array<double, 4> runtime_report(const std::vector<RuntimeBreakdown>& runs) {
  if (runs.empty()) throw EmptyInput("runtime_report: no runs");
  std::array<double, 4> mean{0.0, 0.0, 0.0, 0.0};
  for (const auto& r : runs) {
    const double sum = static_cast<double>(r.step1_ns) +
                       static_cast<double>(r.step2_ns) +
                       static_cast<double>(r.step3_ns) +
                       static_cast<double>(r.step4_ns);
    if (sum <= 0.0) throw EmptyInput("runtime_report: run with zero step times");
    mean[0] += 100.0 * static_cast<double>(r.step1_ns) / sum;
    mean[1] += 100.0 * static_cast<double>(r.step2_ns) / sum;
    mean[2] += 100.0 * static_cast<double>(r.step3_ns) / sum;
    mean[3] += 100.0 * static_cast<double>(r.step4_ns) / sum;
  }
  for (auto& v : mean) v /= static_cast<double>(runs.size());
  return mean;
}

}  // namespace fastdoc
