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

#include "fastdoc/dense_factor.hpp"
#include "fastdoc/ocp.hpp"

namespace fastdoc {

struct SqpSettings {
  int max_iterations = 100;
  double kkt_tolerance = 1e-9;
  /// Inequality rows with value >= -working_eps enter the working set.
  double working_eps = 1e-8;
  /// Threshold used for the reported active mask of the solution.
  double active_eps = 1e-6;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-10;
  double penalty_init = 10.0;
  /// A working set revisited this many times after being left raises
  /// ActiveSetChanged (cycling).
  int max_set_revisits = 3;
  RegPolicy reg;
};

/// Gauss-Newton SQP with an elastic working set for the inequalities. Each
/// iteration linearizes the constraints, solves the equality-constrained
/// subproblem through the structured backward-pass kernel, drops working rows
/// with negative multipliers, caps the step at the first blocking inequality
/// and backtracks on an l1 merit function.
///
/// Throws MaxIterations (with the last residual), LineSearchFailure,
/// ActiveSetChanged on working-set cycling, InfeasibleActiveSet when the
/// working rows become linearly dependent, and GradientNonFinite when an
/// iterate leaves the domain of the callbacks.
SolvedTrajectory solve_ocp(const OcpDefinition& ocp, const Vector& theta,
                           const Vector& x_init,
                           const SqpSettings& settings = SqpSettings(),
                           const Vector* warm_start = nullptr);

/// Central-difference sensitivity of the re-solved trajectory:
/// column j = (xi*(theta + h_j e_j) - xi*(theta - h_j e_j)) / (2 h_j) with
/// h_j = fd_step * (1 + |theta_j|). Throws ActiveSetChanged when a probe
/// lands on a different active set than the base solve.
Matrix fd_sensitivity_oracle(const OcpDefinition& ocp, const Vector& theta,
                             const Vector& x_init, double fd_step = 1e-5,
                             const SqpSettings& settings = SqpSettings());

}  // namespace fastdoc
