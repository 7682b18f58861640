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
#include "fastdoc/kkt_assembly.hpp"

#include <algorithm>
#include <vector>

namespace fastdoc {

namespace {

Matrix select_rows(const Matrix& m, const std::vector<bool>& mask) {
  int count = 0;
  for (bool b : mask) count += b ? 1 : 0;
  Matrix out(count, m.cols());
  int r = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.row(r++) = m.row(static_cast<Eigen::Index>(i));
  return out;
}

int count_active(const std::vector<bool>& mask) {
  int count = 0;
  for (bool b : mask) count += b ? 1 : 0;
  return count;
}

// Multipliers of one stage's constraint rows, in row order.
struct StageMultipliers {
  Vector active_g;
  Vector eq;
  Vector dyn;
};

// Splits traj.lambda (init rows, then per-stage rows) by stage. The mask
// determines how many inequality rows each stage contributed.
struct MultiplierView {
  Vector init;
  std::vector<StageMultipliers> stage;
};

MultiplierView split_multipliers(const OcpDefinition& ocp, const Vector& theta,
                                 const SolvedTrajectory& traj) {
  MultiplierView view;
  view.stage.resize(static_cast<std::size_t>(ocp.stage_count()));
  int off = 0;
  auto take = [&](int n) {
    if (off + n > traj.lambda.size())
      throw DimensionMismatch("multiplier vector shorter than the constraint rows");
    Vector v = traj.lambda.segment(off, n);
    off += n;
    return v;
  };
  view.init = take(ocp.state_dim);
  for (int k = 0; k <= ocp.horizon; ++k) {
    auto& sm = view.stage[static_cast<std::size_t>(k)];
    int n_act = 0;
    if (ocp.has_inequality()) {
      if (static_cast<int>(traj.active_mask.size()) != ocp.stage_count())
        throw DimensionMismatch("active_mask stage count mismatch");
      n_act = count_active(traj.active_mask[static_cast<std::size_t>(k)]);
    }
    sm.active_g = take(n_act);
    if (ocp.has_equality()) {
      const Vector h = ocp.equality(k, traj.stage_vars(ocp, k), theta);
      sm.eq = take(static_cast<int>(h.size()));
    } else {
      sm.eq = Vector(0);
    }
    sm.dyn = k < ocp.horizon ? take(ocp.state_dim) : Vector(0);
  }
  if (off != traj.lambda.size())
    throw DimensionMismatch("multiplier vector longer than the constraint rows");
  return view;
}

// grad_xi of the constraint part of the stage Lagrangian, with the Jacobians
// evaluated at (xi, theta). Used inside the finite-difference loops.
Vector constraint_gradient(const OcpDefinition& ocp, int k, const Vector& xi,
                           const Vector& theta, const std::vector<bool>& mask,
                           const StageMultipliers& sm) {
  Vector g = Vector::Zero(xi.size());
  if (ocp.has_inequality() && sm.active_g.size() > 0) {
    const Matrix jg = select_rows(ocp.inequality_jac_xi(k, xi, theta), mask);
    g.noalias() += jg.transpose() * sm.active_g;
  }
  if (ocp.has_equality() && sm.eq.size() > 0) {
    const Matrix jh = ocp.equality_jac_xi(k, xi, theta);
    g.noalias() += jh.transpose() * sm.eq;
  }
  if (k < ocp.horizon && sm.dyn.size() > 0) {
    const Matrix jf = ocp.dynamics_jac_xi(k, xi, theta);
    g.noalias() += jf.transpose() * sm.dyn;
  }
  return g;
}

Vector full_stage_gradient(const OcpDefinition& ocp, int k, const Vector& xi,
                           const Vector& theta, const std::vector<bool>& mask,
                           const StageMultipliers& sm) {
  const Vector phi = ocp.residual(k, xi, theta);
  const Matrix j = ocp.residual_jac_xi(k, xi, theta);
  Vector g = j.transpose() * phi;
  g += constraint_gradient(ocp, k, xi, theta, mask, sm);
  return g;
}

}  // namespace

std::vector<std::vector<bool>> detect_active_set(
    const std::vector<Vector>& inequality_values, double eps) {
  std::vector<std::vector<bool>> mask(inequality_values.size());
  for (std::size_t k = 0; k < inequality_values.size(); ++k) {
    const Vector& g = inequality_values[k];
    mask[k].resize(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) mask[k][static_cast<std::size_t>(i)] = g(i) >= -eps;
  }
  return mask;
}

BlockDiagMatrix gauss_newton_hessian(const OcpDefinition& ocp, const Vector& theta,
                                     const SolvedTrajectory& traj) {
  ocp.validate();
  BlockDiagMatrix h;
  for (int k = 0; k <= ocp.horizon; ++k) {
    const Vector xi = traj.stage_vars(ocp, k);
    const Matrix j = ocp.residual_jac_xi(k, xi, theta);
    if (j.cols() != ocp.xi_dim(k))
      throw DimensionMismatch("gauss_newton_hessian: residual Jacobian width");
    Matrix hk = j.transpose() * j;
    h.blocks.push_back(0.5 * (hk + hk.transpose()));
  }
  return h;
}

DiffKktSystem assemble_dkkt(const OcpDefinition& ocp, const Vector& theta,
                            const SolvedTrajectory& traj, HessianMode mode,
                            double fd_step_scale) {
  ocp.validate();
  if (theta.size() != ocp.param_dim)
    throw DimensionMismatch("assemble_dkkt: theta size mismatch");
  if (traj.xi.size() != ocp.total_xi_dim())
    throw DimensionMismatch("assemble_dkkt: xi size mismatch");

  const MultiplierView mult = split_multipliers(ocp, theta, traj);
  const std::vector<bool> empty_mask;

  DiffKktSystem sys;
  sys.n_theta = ocp.param_dim;

  // Initial-condition rows [I 0] on stage 0; independent of theta.
  {
    ConstraintRowBlock init;
    init.stage = 0;
    init.on_stage = Matrix::Zero(ocp.state_dim, ocp.xi_dim(0));
    init.on_stage.leftCols(ocp.state_dim).setIdentity();
    sys.rows.push_back(std::move(init));
    sys.constraint_cross.push_back(Matrix::Zero(ocp.state_dim, ocp.param_dim));
  }

  for (int k = 0; k <= ocp.horizon; ++k) {
    const Vector xi = traj.stage_vars(ocp, k);
    const std::vector<bool>& mask =
        ocp.has_inequality() ? traj.active_mask[static_cast<std::size_t>(k)]
                             : empty_mask;
    const StageMultipliers& sm = mult.stage[static_cast<std::size_t>(k)];
    const int dim = ocp.xi_dim(k);

    const Matrix j_phi = ocp.residual_jac_xi(k, xi, theta);
    const Matrix jt_phi = ocp.residual_jac_theta(k, xi, theta);
    if (j_phi.cols() != dim || jt_phi.cols() != ocp.param_dim ||
        j_phi.rows() != jt_phi.rows())
      throw DimensionMismatch("assemble_dkkt: residual Jacobian shapes");

    // Hessian block.
    Matrix hk;
    if (mode == HessianMode::gauss_newton) {
      hk.noalias() = j_phi.transpose() * j_phi;
      hk = 0.5 * (hk + hk.transpose());
    } else {
      hk.resize(dim, dim);
      for (int i = 0; i < dim; ++i) {
        const double h = fd_step_scale * (1.0 + std::abs(xi(i)));
        Vector hi = xi, lo = xi;
        hi(i) += h;
        lo(i) -= h;
        hk.col(i) = (full_stage_gradient(ocp, k, hi, theta, mask, sm) -
                     full_stage_gradient(ocp, k, lo, theta, mask, sm)) /
                    (2.0 * h);
      }
      hk = 0.5 * (hk + hk.transpose());
    }
    sys.hessian.blocks.push_back(std::move(hk));

    // Parameter cross block B_k.
    Matrix bk;
    if (mode == HessianMode::gauss_newton) {
      bk.noalias() = j_phi.transpose() * jt_phi;
      if (!ocp.constraints_param_independent) {
        for (int j = 0; j < ocp.param_dim; ++j) {
          const double h = fd_step_scale * (1.0 + std::abs(theta(j)));
          Vector hi = theta, lo = theta;
          hi(j) += h;
          lo(j) -= h;
          bk.col(j) += (constraint_gradient(ocp, k, xi, hi, mask, sm) -
                        constraint_gradient(ocp, k, xi, lo, mask, sm)) /
                       (2.0 * h);
        }
      }
    } else {
      bk.resize(dim, ocp.param_dim);
      for (int j = 0; j < ocp.param_dim; ++j) {
        const double h = fd_step_scale * (1.0 + std::abs(theta(j)));
        Vector hi = theta, lo = theta;
        hi(j) += h;
        lo(j) -= h;
        bk.col(j) = (full_stage_gradient(ocp, k, xi, hi, mask, sm) -
                     full_stage_gradient(ocp, k, xi, lo, mask, sm)) /
                    (2.0 * h);
      }
    }
    sys.param_cross.push_back(std::move(bk));

    // Constraint rows of this stage.
    Matrix on_stage(0, dim), cross(0, ocp.param_dim);
    auto append_rows = [&](const Matrix& a, const Matrix& c) {
      if (a.rows() == 0) return;
      Matrix na(on_stage.rows() + a.rows(), dim);
      na << on_stage, a;
      on_stage = std::move(na);
      Matrix nc(cross.rows() + c.rows(), ocp.param_dim);
      nc << cross, c;
      cross = std::move(nc);
    };
    if (ocp.has_inequality()) {
      append_rows(select_rows(ocp.inequality_jac_xi(k, xi, theta), mask),
                  select_rows(ocp.inequality_jac_theta(k, xi, theta), mask));
    }
    if (ocp.has_equality()) {
      append_rows(ocp.equality_jac_xi(k, xi, theta),
                  ocp.equality_jac_theta(k, xi, theta));
    }
    const int pre_dyn_rows = static_cast<int>(on_stage.rows());
    if (k < ocp.horizon) {
      append_rows(ocp.dynamics_jac_xi(k, xi, theta),
                  ocp.dynamics_jac_theta(k, xi, theta));
    }
    if (on_stage.rows() == 0) continue;

    ConstraintRowBlock blk;
    blk.stage = k;
    blk.on_stage = std::move(on_stage);
    if (k < ocp.horizon) {
      blk.on_next = Matrix::Zero(blk.on_stage.rows(), ocp.xi_dim(k + 1));
      blk.on_next.block(pre_dyn_rows, 0, ocp.state_dim, ocp.state_dim) =
          -Matrix::Identity(ocp.state_dim, ocp.state_dim);
    }
    sys.rows.push_back(std::move(blk));
    sys.constraint_cross.push_back(std::move(cross));
  }

  sys.validate();
  return sys;
}

double kkt_residual(const OcpDefinition& ocp, const Vector& theta,
                    const Vector& x_init, const SolvedTrajectory& traj) {
  ocp.validate();
  if (x_init.size() != ocp.state_dim)
    throw DimensionMismatch("kkt_residual: x_init size mismatch");
  const MultiplierView mult = split_multipliers(ocp, theta, traj);
  const std::vector<bool> empty_mask;
  double res = 0.0;
  auto bump = [&](double v) { res = std::max(res, std::abs(v)); };

  std::vector<Vector> grad(static_cast<std::size_t>(ocp.stage_count()));
  for (int k = 0; k <= ocp.horizon; ++k) {
    const Vector xi = traj.stage_vars(ocp, k);
    const std::vector<bool>& mask =
        ocp.has_inequality() ? traj.active_mask[static_cast<std::size_t>(k)]
                             : empty_mask;
    grad[static_cast<std::size_t>(k)] = full_stage_gradient(
        ocp, k, xi, theta, mask, mult.stage[static_cast<std::size_t>(k)]);
  }
  // Cross-stage terms: the initial rows act on x_0, each dynamics block
  // contributes -lambda_dyn to the next stage's state part.
  grad[0].head(ocp.state_dim) += mult.init;
  for (int k = 0; k < ocp.horizon; ++k)
    grad[static_cast<std::size_t>(k) + 1].head(ocp.state_dim) -=
        mult.stage[static_cast<std::size_t>(k)].dyn;
  for (const Vector& g : grad)
    for (int i = 0; i < g.size(); ++i) bump(g(i));

  // Primal feasibility.
  {
    const Vector c0 = traj.state(ocp, 0) - x_init;
    for (int i = 0; i < c0.size(); ++i) bump(c0(i));
  }
  for (int k = 0; k <= ocp.horizon; ++k) {
    const Vector xi = traj.stage_vars(ocp, k);
    if (k < ocp.horizon) {
      const Vector d = ocp.dynamics(k, xi, theta) - traj.state(ocp, k + 1);
      for (int i = 0; i < d.size(); ++i) bump(d(i));
    }
    if (ocp.has_equality()) {
      const Vector h = ocp.equality(k, xi, theta);
      for (int i = 0; i < h.size(); ++i) bump(h(i));
    }
    if (ocp.has_inequality()) {
      const Vector g = ocp.inequality(k, xi, theta);
      const auto& mask = traj.active_mask[static_cast<std::size_t>(k)];
      int a = 0;
      for (int i = 0; i < g.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
          bump(g(i));
          // Dual feasibility for inequality multipliers.
          const double lam =
              mult.stage[static_cast<std::size_t>(k)].active_g(a++);
          if (lam < 0.0) bump(lam);
        } else if (g(i) > 0.0) {
          bump(g(i));
        }
      }
    }
  }
  return res;
}

}  // namespace fastdoc
