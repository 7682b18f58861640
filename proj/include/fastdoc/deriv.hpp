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

#include <array>
#include <cstdint>
#include <vector>

#include "fastdoc/block_ops.hpp"
#include "fastdoc/dkkt.hpp"

namespace fastdoc {

/// Wall time of the four backward-pass steps in nanoseconds:
///   step 1: block-diagonal Hessian inversion
///   step 2: Schur complement assembly (S = A H^-1 A^T, Gamma = A H^-1 B - C)
///   step 3: block-tridiagonal solve of S X = Gamma
///   step 4: primal recovery dxi = H^-1 (A^T X - B)
struct RuntimeBreakdown {
  std::int64_t step1_ns = 0;
  std::int64_t step2_ns = 0;
  std::int64_t step3_ns = 0;
  std::int64_t step4_ns = 0;
  std::int64_t total_ns = 0;
};

/// Parameter sensitivities of a solved trajectory: dxi/dtheta stacked over
/// stages and dlambda/dtheta stacked over constraint row blocks.
struct TrajectoryDerivatives {
  Matrix dxi_dtheta;
  Matrix dlambda_dtheta;
  RuntimeBreakdown breakdown;
};

/// Per-step factorization cost reports for the counting mode.
struct BackwardStats {
  BlockFactorStats step1;
  BlockFactorStats step3;
};

/// Structured backward pass. Exploits the block-diagonal Hessian and the
/// block-tridiagonal Schur complement; all factorizations are Cholesky, with
/// the shift policy applied to blocks that fail a pivot. Cost is linear in
/// the horizon length and cubic only in the block sizes.
TrajectoryDerivatives fastdoc_backward(const DiffKktSystem& sys,
                                       const RegPolicy& reg = RegPolicy(),
                                       BackwardStats* stats = nullptr,
                                       bool count_flops = false);

/// Identical sweep structure with LU factorizations and general substitution
/// everywhere. Baseline for the factorization cost comparison; roughly twice
/// the factor flops per block.
TrajectoryDerivatives blocklu_backward(const DiffKktSystem& sys,
                                       BackwardStats* stats = nullptr,
                                       bool count_flops = false);

/// Fully assembled saddle-point system, the input layout of the dense
/// oracle.
struct DenseKkt {
  Matrix kkt;
  Matrix rhs;
  int n_primal = 0;
  int n_theta = 0;
};

/// Materializes the dense saddle-point matrix [[H, A^T], [A, 0]] and the
/// stacked right-hand side [-B; -C].
DenseKkt assemble_dense_kkt(const DiffKktSystem& sys);

/// Reference oracle: assembles the full saddle-point matrix and solves it
/// with a dense pivoted LU. Quadratic memory, cubic time in the *total*
/// dimension; only viable for small systems. Throws SingularSystem when the
/// assembled KKT matrix is numerically singular.
TrajectoryDerivatives dense_backward(const DiffKktSystem& sys);

/// Solve phase of the dense oracle on a pre-assembled system.
TrajectoryDerivatives dense_backward(const DenseKkt& dk);

/// Mean share (percent) of each backward-pass step over a set of runs.
/// Shares are computed per run against the sum of the four step times, then
/// averaged, so the result sums to 100 up to rounding. Throws EmptyInput on
/// an empty set.
std::array<double, 4> runtime_report(const std::vector<RuntimeBreakdown>& runs);

}  // namespace fastdoc
