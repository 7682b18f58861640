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
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fastdoc/types.hpp"

namespace fastdoc {

/// Discrete-time parametric optimal control problem
///
///   min_xi  sum_k 1/2 |phi_k(xi_k, theta)|^2
///   s.t.    x_0 = x_init
///           x_{k+1} = f_k(xi_k, theta)          k = 0 .. N-1
///           h_k(xi_k, theta)  = 0               (optional)
///           g_k(xi_k, theta) <= 0               (optional)
///
/// with stage variables xi_k = (x_k, u_k) for k < N and xi_N = x_N. All
/// callbacks receive (k, xi_k, theta). Residual row counts may differ per
/// stage but must be consistent across calls; inequality/equality callback
/// triples are either all set or all null.
struct OcpDefinition {
  int horizon = 0;
  int state_dim = 0;
  int control_dim = 0;
  int param_dim = 0;

  std::function<Vector(int, const Vector&, const Vector&)> residual;
  std::function<Matrix(int, const Vector&, const Vector&)> residual_jac_xi;
  std::function<Matrix(int, const Vector&, const Vector&)> residual_jac_theta;

  std::function<Vector(int, const Vector&, const Vector&)> dynamics;
  std::function<Matrix(int, const Vector&, const Vector&)> dynamics_jac_xi;
  std::function<Matrix(int, const Vector&, const Vector&)> dynamics_jac_theta;

  std::function<Vector(int, const Vector&, const Vector&)> inequality;
  std::function<Matrix(int, const Vector&, const Vector&)> inequality_jac_xi;
  std::function<Matrix(int, const Vector&, const Vector&)> inequality_jac_theta;

  std::function<Vector(int, const Vector&, const Vector&)> equality;
  std::function<Matrix(int, const Vector&, const Vector&)> equality_jac_xi;
  std::function<Matrix(int, const Vector&, const Vector&)> equality_jac_theta;

  /// Set when no constraint callback reads theta. The assembly then skips the
  /// finite-difference constraint cross term, which is exactly zero.
  bool constraints_param_independent = false;

  int xi_dim(int k) const {
    return k < horizon ? state_dim + control_dim : state_dim;
  }
  int stage_count() const { return horizon + 1; }
  int total_xi_dim() const {
    return horizon * (state_dim + control_dim) + state_dim;
  }
  bool has_inequality() const { return static_cast<bool>(inequality); }
  bool has_equality() const { return static_cast<bool>(equality); }

  /// Structural checks (dimensions positive, callback triples complete).
  void validate() const;

  /// Compares every user Jacobian against central differences at `samples`
  /// random points per stage. Throws JacobianMismatch naming the offender.
  void validate_jacobians(const Vector& theta, std::uint64_t seed = 0,
                          int samples = 2, double tol = 1e-5) const;
};

/// Primal-dual solution of an OcpDefinition at a fixed parameter vector.
/// `lambda` is stacked in constraint-row order: the initial-condition rows,
/// then per stage k < N the active inequalities, equalities and dynamics
/// rows, then the terminal active inequalities and equalities. `active_mask`
/// holds one flag per inequality row per stage (empty inner vectors when the
/// problem has no inequalities).
struct SolvedTrajectory {
  Vector xi;
  Vector lambda;
  std::vector<std::vector<bool>> active_mask;
  double kkt_residual = 0.0;
  int iterations = 0;

  Vector stage_vars(const OcpDefinition& ocp, int k) const;
  Vector state(const OcpDefinition& ocp, int k) const;
  Vector control(const OcpDefinition& ocp, int k) const;
};

}  // namespace fastdoc
