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
#include <vector>

#include "fastdoc/types.hpp"

namespace fastdoc {

/// Levenberg-style shift policy applied when a symmetric factorization hits a
/// nonpositive pivot. The first attempt always runs unshifted; on failure the
/// shift starts at max(floor, scale * trace(M) / n) and is multiplied by
/// `escalation` on each further failure, up to `max_attempts` shifted tries.
struct RegPolicy {
  bool enabled = true;
  double floor = 1e-12;
  double scale = 1e-10;
  double escalation = 100.0;
  int max_attempts = 3;

  static RegPolicy none() {
    RegPolicy p;
    p.enabled = false;
    return p;
  }
};

/// Lower-triangular Cholesky factor M + mu*I = L L^T.
struct CholeskyFactor {
  Matrix lower;
  double regularization_used = 0.0;
  /// Multiply count of the factorization (adds counted separately), filled
  /// only when the factorization ran in counting mode; 0 otherwise.
  std::uint64_t factor_multiplies = 0;
  std::uint64_t factor_adds = 0;

  std::uint64_t factor_flops() const { return factor_multiplies + factor_adds; }
  int dim() const { return static_cast<int>(lower.rows()); }
};

/// Row-pivoted LU factor P M = L U packed in one matrix (unit lower diagonal
/// implied).
struct LuFactor {
  Matrix lu;
  std::vector<int> perm;
  std::uint64_t factor_multiplies = 0;
  std::uint64_t factor_adds = 0;

  std::uint64_t factor_flops() const { return factor_multiplies + factor_adds; }
  int dim() const { return static_cast<int>(lu.rows()); }
};

/// Factors a symmetric positive definite matrix, applying the shift policy on
/// pivot failure. Throws NotPositiveDefinite once the policy is exhausted and
/// DimensionMismatch for non-square or non-symmetric input (max asymmetry
/// checked against 1e-9 relative to the largest entry).
CholeskyFactor cholesky_factor(const Matrix& m, const RegPolicy& reg = RegPolicy(),
                               bool count_flops = false);

/// Solves (L L^T) X = rhs by forward then backward substitution.
Matrix cholesky_solve(const CholeskyFactor& f, const Matrix& rhs);

/// Explicit inverse of the factored matrix. Inverts L in place and forms
/// L^-T L^-1 through a symmetric triangular product, so the cost stays at
/// n^3 + O(n^2) instead of the 2n^3 of a general solve against the identity.
Matrix cholesky_inverse(const CholeskyFactor& f);

/// Factors a general square matrix with partial pivoting. Throws
/// SingularSystem when a pivot column is exactly zero or the pivot ratio
/// max|u_ii|/min|u_ii| exceeds 1/eps scale (no shift policy on this path).
LuFactor lu_factor(const Matrix& m, bool count_flops = false);

/// Solves (P^-1 L U) X = rhs.
Matrix lu_solve(const LuFactor& f, const Matrix& rhs);

/// Explicit inverse via substitution against the identity.
Matrix lu_inverse(const LuFactor& f);

}  // namespace fastdoc
