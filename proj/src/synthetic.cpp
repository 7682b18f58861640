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
#include "fastdoc/synthetic.hpp"

#include <algorithm>

#include "fastdoc/rng.hpp"

namespace fastdoc {

namespace {

// Symmetric matrix with spectrum affinely rescaled onto [1/cond, 1].
Matrix conditioned_spd(int dim, double cond, Rng& rng) {
  Matrix a = rng.uniform_matrix(dim, dim);
  Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector lam = eig.eigenvalues();
  const double lo = lam.minCoeff();
  const double hi = lam.maxCoeff();
  Vector scaled(dim);
  if (hi - lo <= 0.0) {
    scaled.setOnes();
  } else {
    for (int i = 0; i < dim; ++i)
      scaled(i) = 1.0 / cond + (lam(i) - lo) / (hi - lo) * (1.0 - 1.0 / cond);
  }
  Matrix q = eig.eigenvectors() * scaled.asDiagonal() *
             eig.eigenvectors().transpose();
  return 0.5 * (q + q.transpose());
}

}  // namespace

int synthetic_stage_constraint_rows(int n, int m) {
  return std::max(0, std::min((n + 7) / 8, m - 1));
}

DiffKktSystem gen_synthetic(int horizon, int state_dim, int control_dim,
                            int param_dim, double cond, std::uint64_t seed) {
  if (horizon < 1 || state_dim < 1 || control_dim < 1 || param_dim < 1)
    throw DimensionMismatch("gen_synthetic: dimensions must be positive");
  if (cond < 1.0) throw DimensionMismatch("gen_synthetic: cond must be >= 1");

  const int n = state_dim;
  const int m = control_dim;
  const int c = synthetic_stage_constraint_rows(n, m);
  Rng rng(seed);

  DiffKktSystem sys;
  sys.n_theta = param_dim;
  auto dim_of = [&](int k) { return k < horizon ? n + m : n; };

  for (int k = 0; k <= horizon; ++k)
    sys.hessian.blocks.push_back(conditioned_spd(dim_of(k), cond, rng));

  {
    ConstraintRowBlock init;
    init.stage = 0;
    init.on_stage = Matrix::Zero(n, dim_of(0));
    init.on_stage.leftCols(n) = Matrix::Identity(n, n);
    sys.rows.push_back(std::move(init));
  }
  for (int k = 0; k < horizon; ++k) {
    ConstraintRowBlock blk;
    blk.stage = k;
    blk.on_stage = rng.uniform_matrix(c + n, dim_of(k));
    blk.on_next = Matrix::Zero(c + n, dim_of(k + 1));
    blk.on_next.bottomRows(n) = rng.uniform_matrix(n, dim_of(k + 1));
    sys.rows.push_back(std::move(blk));
  }
  if (c > 0) {
    ConstraintRowBlock term;
    term.stage = horizon;
    term.on_stage = rng.uniform_matrix(c, dim_of(horizon));
    sys.rows.push_back(std::move(term));
  }

  for (int k = 0; k <= horizon; ++k)
    sys.param_cross.push_back(rng.uniform_matrix(dim_of(k), param_dim));
  for (const auto& r : sys.rows)
    sys.constraint_cross.push_back(rng.uniform_matrix(r.rows(), param_dim));

  sys.validate();
  return sys;
}

SmoothOcpInstance smooth_ocp_instance(int state_dim, int control_dim,
                                      int horizon, int param_dim,
                                      std::uint64_t seed) {
  if (state_dim < 1 || control_dim < 1 || horizon < 1 || param_dim < 1)
    throw DimensionMismatch("smooth_ocp_instance: dimensions must be positive");
  const int nx = state_dim;
  const int nu = control_dim;
  const int ntheta = param_dim;
  Rng rng(seed);
  const double dt = 0.1;
  Matrix r1 = 0.3 * rng.uniform_matrix(nx, nx);
  Matrix r2 = rng.uniform_matrix(nx, nu);
  Matrix r3 = rng.uniform_matrix(nx, nx);
  Matrix r4 = 0.5 * rng.uniform_matrix(nx, ntheta);
  Matrix r5 = 0.2 * rng.uniform_matrix(nx, nx);
  Vector mix = rng.uniform_vector(ntheta);

  SmoothOcpInstance inst;
  OcpDefinition& ocp = inst.ocp;
  ocp.horizon = horizon;
  ocp.state_dim = nx;
  ocp.control_dim = nu;
  ocp.param_dim = ntheta;

  ocp.dynamics = [=](int, const Vector& xi, const Vector& theta) {
    const Vector x = xi.head(nx);
    const Vector u = xi.tail(nu);
    const double s = mix.dot(theta);
    Vector out = x + dt * (r1 * x + r2 * u + r4 * theta + s * (r5 * x));
    out += dt * 0.3 * (r3 * x).array().tanh().matrix();
    return out;
  };
  ocp.dynamics_jac_xi = [=](int, const Vector& xi, const Vector& theta) {
    const Vector x = xi.head(nx);
    const double s = mix.dot(theta);
    Matrix jx = Matrix::Identity(nx, nx) + dt * (r1 + s * r5);
    const Vector t = (r3 * x).array().tanh().matrix();
    for (int i = 0; i < nx; ++i)
      jx.row(i) += dt * 0.3 * (1.0 - t(i) * t(i)) * r3.row(i);
    Matrix j(nx, nx + nu);
    j << jx, dt * r2;
    return j;
  };
  ocp.dynamics_jac_theta = [=](int, const Vector& xi, const Vector&) {
    const Vector x = xi.head(nx);
    Matrix j = dt * r4;
    j += dt * (r5 * x) * mix.transpose();
    return j;
  };

  inst.theta_ref = rng.uniform_vector(ntheta, -0.5, 0.5);
  inst.x_init = rng.uniform_vector(nx, -0.5, 0.5);

  // Reference = rollout of random controls at theta_ref; tracking it exactly
  // is feasible, so the optimal residual vanishes there.
  std::vector<Vector> ref(static_cast<std::size_t>(horizon) + 1);
  {
    Vector x = inst.x_init;
    inst.xi_ref = Vector::Zero(horizon * (nx + nu) + nx);
    for (int k = 0; k < horizon; ++k) {
      const Vector u = rng.uniform_vector(nu, -0.3, 0.3);
      Vector xi(nx + nu);
      xi << x, u;
      ref[static_cast<std::size_t>(k)] = xi;
      inst.xi_ref.segment(k * (nx + nu), nx + nu) = xi;
      x = ocp.dynamics(k, xi, inst.theta_ref);
    }
    ref[static_cast<std::size_t>(horizon)] = x;
    inst.xi_ref.tail(nx) = x;
  }

  ocp.residual = [=](int k, const Vector& xi, const Vector&) {
    return Vector(xi - ref[static_cast<std::size_t>(k)]);
  };
  ocp.residual_jac_xi = [=](int, const Vector& xi, const Vector&) {
    return Matrix(Matrix::Identity(xi.size(), xi.size()));
  };
  ocp.residual_jac_theta = [=](int, const Vector& xi, const Vector&) {
    return Matrix(Matrix::Zero(xi.size(), ntheta));
  };
  return inst;
}

}  // namespace fastdoc
