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

#include "fastdoc/dkkt.hpp"
#include "fastdoc/ocp.hpp"

namespace fastdoc {

/// How the Lagrangian Hessian blocks are formed during assembly.
///   gauss_newton: H_k = J_phi^T J_phi, positive semidefinite by
///     construction, exact when residuals or constraint curvature vanish.
///   exact_fd: central differences of the full stage gradient
///     grad_xi(1/2|phi|^2 + lambda^T c); captures residual and constraint
///     curvature at 2*dim extra gradient evaluations per stage.
enum class HessianMode { gauss_newton, exact_fd };

/// Marks inequality row (k, i) active when g_{k,i} >= -eps. Input is the raw
/// inequality value vector per stage (empty vectors allowed).
std::vector<std::vector<bool>> detect_active_set(
    const std::vector<Vector>& inequality_values, double eps = 1e-6);

/// Gauss-Newton Hessian blocks J_phi^T J_phi at the trajectory's stage
/// points, symmetrized.
BlockDiagMatrix gauss_newton_hessian(const OcpDefinition& ocp, const Vector& theta,
                                     const SolvedTrajectory& traj);

/// Builds the differential KKT system at a solved trajectory: Hessian blocks
/// per `mode`, constraint rows for the initial condition, active
/// inequalities, equalities and dynamics, and the parameter cross blocks
///   B_k = d/dtheta grad_xi L,  C_i = d/dtheta c_i.
/// The Gauss-Newton route forms B_k as J_phi^T d(phi)/d(theta) plus a central
/// finite difference of the constraint-gradient term A_k^T lambda_k over
/// theta (skipped exactly when constraints_param_independent is set).
DiffKktSystem assemble_dkkt(const OcpDefinition& ocp, const Vector& theta,
                            const SolvedTrajectory& traj,
                            HessianMode mode = HessianMode::gauss_newton,
                            double fd_step_scale = 1e-6);

/// Infinity norm of the first-order optimality residual at (xi, lambda):
/// stationarity, equality/dynamics/initial-condition violation, active
/// inequality violation, inactive inequality positivity, and negative
/// inequality multipliers.
double kkt_residual(const OcpDefinition& ocp, const Vector& theta,
                    const Vector& x_init, const SolvedTrajectory& traj);

}  // namespace fastdoc
