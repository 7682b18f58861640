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

#include "fastdoc/types.hpp"

namespace fastdoc {

/// Block-diagonal matrix with square blocks of possibly different sizes.
struct BlockDiagMatrix {
  std::vector<Matrix> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }

  int total_dim() const {
    int d = 0;
    for (const auto& b : blocks) d += static_cast<int>(b.rows());
    return d;
  }

  /// Dense assembly, intended for tests and small oracles only.
  Matrix to_dense() const {
    const int d = total_dim();
    Matrix out = Matrix::Zero(d, d);
    int off = 0;
    for (const auto& b : blocks) {
      const int n = static_cast<int>(b.rows());
      out.block(off, off, n, n) = b;
      off += n;
    }
    return out;
  }
};

/// Symmetric block-tridiagonal matrix. `diag[r]` are the square diagonal
/// blocks; `sub[r]` couples block row r+1 to block row r, i.e. the dense
/// matrix carries sub[r] at (r+1, r) and sub[r]^T at (r, r+1). Zero-size
/// blocks (0 rows) are legal and represent empty block rows.
struct BlockTriDiagMatrix {
  std::vector<Matrix> diag;
  std::vector<Matrix> sub;

  int block_count() const { return static_cast<int>(diag.size()); }

  int total_dim() const {
    int d = 0;
    for (const auto& b : diag) d += static_cast<int>(b.rows());
    return d;
  }

  /// Checks the invariants (sub count, shapes, diagonal symmetry) and throws
  /// DimensionMismatch on violation. Symmetry tolerance is relative.
  void validate(double sym_tol = 1e-9) const;

  Matrix to_dense() const;
};

/// Block column vector: one matrix per block row, all with the same column
/// count (the parameter dimension in the backward pass).
struct BlockColumn {
  std::vector<Matrix> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }

  int total_rows() const {
    int d = 0;
    for (const auto& b : blocks) d += static_cast<int>(b.rows());
    return d;
  }

  Matrix to_dense() const {
    const int r = total_rows();
    const int c = blocks.empty() ? 0 : static_cast<int>(blocks.front().cols());
    Matrix out = Matrix::Zero(r, c);
    int off = 0;
    for (const auto& b : blocks) {
      out.block(off, 0, b.rows(), b.cols()) = b;
      off += static_cast<int>(b.rows());
    }
    return out;
  }
};

}  // namespace fastdoc
