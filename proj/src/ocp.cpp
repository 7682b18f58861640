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
#include "fastdoc/ocp.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "fastdoc/rng.hpp"

namespace fastdoc {

void OcpDefinition::validate() const {
  if (horizon < 1) throw DimensionMismatch("OcpDefinition: horizon must be >= 1");
  if (state_dim < 1 || control_dim < 1 || param_dim < 1)
    throw DimensionMismatch("OcpDefinition: dimensions must be positive");
  if (!residual || !residual_jac_xi || !residual_jac_theta)
    throw DimensionMismatch("OcpDefinition: residual callbacks incomplete");
  if (!dynamics || !dynamics_jac_xi || !dynamics_jac_theta)
    throw DimensionMismatch("OcpDefinition: dynamics callbacks incomplete");
  const bool g_any = static_cast<bool>(inequality) ||
                     static_cast<bool>(inequality_jac_xi) ||
                     static_cast<bool>(inequality_jac_theta);
  if (g_any && !(inequality && inequality_jac_xi && inequality_jac_theta))
    throw DimensionMismatch("OcpDefinition: inequality callbacks incomplete");
  const bool h_any = static_cast<bool>(equality) ||
                     static_cast<bool>(equality_jac_xi) ||
                     static_cast<bool>(equality_jac_theta);
  if (h_any && !(equality && equality_jac_xi && equality_jac_theta))
    throw DimensionMismatch("OcpDefinition: equality callbacks incomplete");
}

namespace {

using Fn = std::function<Vector(int, const Vector&, const Vector&)>;
using Jac = std::function<Matrix(int, const Vector&, const Vector&)>;

void check_jacobian(const char* name, int k, const Fn& fn, const Jac& jac,
                    const Vector& xi, const Vector& theta, bool wrt_theta,
                    double tol) {
  const Matrix analytic = jac(k, xi, theta);
  const Vector base = wrt_theta ? theta : xi;
  Matrix fd(analytic.rows(), base.size());
  for (int j = 0; j < base.size(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(base(j)));
    Vector lo = base, hi = base;
    hi(j) += h;
    lo(j) -= h;
    const Vector f_hi = wrt_theta ? fn(k, xi, hi) : fn(k, hi, theta);
    const Vector f_lo = wrt_theta ? fn(k, xi, lo) : fn(k, lo, theta);
    if (f_hi.size() != analytic.rows() || f_lo.size() != analytic.rows())
      throw DimensionMismatch(std::string("validate_jacobians: ") + name +
                              " row count varies across calls");
    fd.col(j) = (f_hi - f_lo) / (2.0 * h);
  }
  if (fd.cols() != analytic.cols())
    throw JacobianMismatch(std::string(name) + ": column count mismatch at stage " +
                           std::to_string(k));
  if (analytic.rows() == 0) return;  // stage contributes no rows
  const double err = (analytic - fd).cwiseAbs().maxCoeff();
  const double scale = 1.0 + analytic.cwiseAbs().maxCoeff();
  if (!(err <= tol * scale)) {
    std::ostringstream os;
    os << name << ": analytic vs finite-difference mismatch " << err << " at stage "
       << k << " (tolerance " << tol * scale << ")";
    throw JacobianMismatch(os.str());
  }
}

}  // namespace

void OcpDefinition::validate_jacobians(const Vector& theta, std::uint64_t seed,
                                       int samples, double tol) const {
  validate();
  if (theta.size() != param_dim)
    throw DimensionMismatch("validate_jacobians: theta size mismatch");
  Rng rng(Rng::child_seed(seed, 0x7ac0b1a5ULL));
  std::vector<int> stages;
  if (horizon <= 6) {
    for (int k = 0; k <= horizon; ++k) stages.push_back(k);
  } else {
    stages = {0, 1, horizon / 2, horizon - 1, horizon};
  }
  for (int k : stages) {
    for (int s = 0; s < samples; ++s) {
      const Vector xi = 0.5 * rng.normal_vector(xi_dim(k));
      check_jacobian("residual_jac_xi", k, residual, residual_jac_xi, xi, theta,
                     false, tol);
      check_jacobian("residual_jac_theta", k, residual, residual_jac_theta, xi,
                     theta, true, tol);
      if (k < horizon) {
        check_jacobian("dynamics_jac_xi", k, dynamics, dynamics_jac_xi, xi, theta,
                       false, tol);
        check_jacobian("dynamics_jac_theta", k, dynamics, dynamics_jac_theta, xi,
                       theta, true, tol);
      }
      if (has_inequality()) {
        check_jacobian("inequality_jac_xi", k, inequality, inequality_jac_xi, xi,
                       theta, false, tol);
        check_jacobian("inequality_jac_theta", k, inequality, inequality_jac_theta,
                       xi, theta, true, tol);
      }
      if (has_equality()) {
        check_jacobian("equality_jac_xi", k, equality, equality_jac_xi, xi, theta,
                       false, tol);
        check_jacobian("equality_jac_theta", k, equality, equality_jac_theta, xi,
                       theta, true, tol);
      }
    }
  }
}

Vector SolvedTrajectory::stage_vars(const OcpDefinition& ocp, int k) const {
  const int step = ocp.state_dim + ocp.control_dim;
  return xi.segment(k * step, ocp.xi_dim(k));
}

Vector SolvedTrajectory::state(const OcpDefinition& ocp, int k) const {
  const int step = ocp.state_dim + ocp.control_dim;
  return xi.segment(k * step, ocp.state_dim);
}

Vector SolvedTrajectory::control(const OcpDefinition& ocp, int k) const {
  if (k >= ocp.horizon)
    throw DimensionMismatch("SolvedTrajectory::control: terminal stage has none");
  const int step = ocp.state_dim + ocp.control_dim;
  return xi.segment(k * step + ocp.state_dim, ocp.control_dim);
}

}  // namespace fastdoc
