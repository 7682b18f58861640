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

#include <vector>

#include "fastdoc/block_matrix.hpp"

namespace fastdoc {

/// One block row of the constraint Jacobian. A row block touches the primal
/// variables of `stage` through `on_stage` and, when `on_next` has columns,
/// those of `stage + 1` through `on_next`. Zero-row blocks are legal.
struct ConstraintRowBlock {
  int stage = 0;
  Matrix on_stage;
  Matrix on_next;

  int rows() const { return static_cast<int>(on_stage.rows()); }
  bool has_next() const { return on_next.cols() > 0; }
};

/// Differential KKT system
///
///   [ H  A^T ] [  dxi/dtheta     ]   [ B ]
///   [ A   0  ] [ -dlambda/dtheta ] = [ C ] * (-1)
///
/// in stage-block form. `hessian` holds the Lagrangian Hessian blocks H_k
/// (one per stage variable group), `rows` the constraint Jacobian block rows
/// ordered by stage, `param_cross` the mixed second derivatives B_k of the
/// Lagrangian w.r.t. (stage variables, parameters), and `constraint_cross`
/// the parameter Jacobians C_i of the constraint residuals, aligned with
/// `rows`.
///
/// Structure requirement: row blocks are sorted by `stage`, and blocks two
/// apart never touch a common stage. This is what makes A H^-1 A^T block
/// tridiagonal when each row block is taken as one block row.
struct DiffKktSystem {
  BlockDiagMatrix hessian;
  std::vector<ConstraintRowBlock> rows;
  std::vector<Matrix> param_cross;
  std::vector<Matrix> constraint_cross;
  int n_theta = 0;

  int stage_count() const { return hessian.block_count(); }
  int stage_dim(int k) const {
    return static_cast<int>(hessian.blocks[static_cast<std::size_t>(k)].rows());
  }
  int row_block_count() const { return static_cast<int>(rows.size()); }
  int total_primal() const { return hessian.total_dim(); }

  int total_constraint_rows() const {
    int r = 0;
    for (const auto& b : rows) r += b.rows();
    return r;
  }

  /// Checks all shape and ordering invariants; throws DimensionMismatch.
  void validate() const;

  /// Dense assembly of A (tests and the dense oracle only).
  Matrix dense_jacobian() const;
  Matrix dense_param_cross() const;
  Matrix dense_constraint_cross() const;
};

}  // namespace fastdoc
