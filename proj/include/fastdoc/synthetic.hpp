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

#include "fastdoc/dkkt.hpp"
#include "fastdoc/ocp.hpp"

namespace fastdoc {

/// Number of stage-constraint rows the generator attaches per stage for a
/// state dimension n and control dimension m: min(ceil(n/8), m-1). Keeping
/// this strictly below m leaves slack columns at every stage, which keeps the
/// stacked Jacobian's conditioning bounded as the horizon grows; generating
/// as many constraint rows as controls makes the Jacobian square and its
/// conditioning blow up exponentially in N.
int synthetic_stage_constraint_rows(int n, int m);

/// Random differential KKT instance with optimal-control structure:
///   - stage variables of size n+m for stages 0..N-1 and n for stage N,
///   - Hessian blocks with spectrum rescaled to condition number `cond`,
///   - an initial-condition row block [I 0] on stage 0,
///   - per stage: stage-constraint rows on stage k only, plus n dense
///     dynamics-style rows coupling stages k and k+1,
///   - a terminal block of stage-constraint rows,
///   - dense uniform(-1,1) parameter blocks B and C with d columns.
///
/// Fully deterministic in `seed`. Throws DimensionMismatch on nonpositive
/// dimensions or cond < 1.
DiffKktSystem gen_synthetic(int horizon, int state_dim, int control_dim,
                            int param_dim, double cond, std::uint64_t seed);

/// Smooth nonlinear tracking instance whose reference is an exact rollout at
/// theta_ref, so the optimum there has zero residual, zero multipliers, and
/// no active inequalities. The state Jacobian of the dynamics depends on
/// theta, which exercises the mixed parameter blocks of the assembly. Used by
/// the verification command and the finite-difference cross-checks.
struct SmoothOcpInstance {
  OcpDefinition ocp;
  Vector theta_ref;
  Vector x_init;
  Vector xi_ref;
};

SmoothOcpInstance smooth_ocp_instance(int state_dim, int control_dim,
                                      int horizon, int param_dim,
                                      std::uint64_t seed);

}  // namespace fastdoc
