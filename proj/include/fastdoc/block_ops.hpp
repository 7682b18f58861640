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
#include "fastdoc/dense_factor.hpp"

namespace fastdoc {

enum class FactorKind { cholesky, lu };

/// Per-block factorization cost and shift report, filled by the block
/// operations when a non-null pointer is passed. Entries are indexed by block
/// and are identical for any worker count.
struct BlockFactorStats {
  struct Entry {
    int dim = 0;
    std::uint64_t multiplies = 0;
    std::uint64_t adds = 0;
    double shift = 0.0;
  };
  std::vector<Entry> entries;

  std::uint64_t total_flops() const {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.multiplies + e.adds;
    return t;
  }
};

/// Inverts every diagonal block independently.
///
/// The Cholesky route factors each block once and forms the explicit inverse
/// through a triangular solve plus a symmetric rank update (half the trailing
/// work of a two-sided substitution); the LU route substitutes against the
/// identity. Blocks may be processed on several workers; the result and the
/// stats are byte-identical for any worker count.
BlockDiagMatrix blockdiag_inverse(const BlockDiagMatrix& h,
                                  FactorKind kind = FactorKind::cholesky,
                                  const RegPolicy& reg = RegPolicy(),
                                  int threads = 1,
                                  BlockFactorStats* stats = nullptr,
                                  bool count_flops = false);

/// Solves S X = Gamma for a symmetric block-tridiagonal S by one forward
/// block elimination sweep and one backward substitution sweep.
///
/// On the Cholesky route the eliminated diagonal blocks are factored as
/// L L^T and the coupling is applied through W = L^-1 sub^T, so each update
/// is a single triangular solve plus a rank update. The LU route performs the
/// textbook two-triangular-solve elimination and serves as the baseline.
BlockColumn blocktridiag_solve(const BlockTriDiagMatrix& s, const BlockColumn& gamma,
                               FactorKind kind = FactorKind::cholesky,
                               const RegPolicy& reg = RegPolicy(),
                               BlockFactorStats* stats = nullptr,
                               bool count_flops = false);

/// Diagnostic for the positive-semidefiniteness of the eliminated diagonal
/// blocks: runs the forward sweep (LU-based so indefinite input still sweeps)
/// and returns the minimum eigenvalue of each transformed block. Zero-size
/// blocks report 0.
std::vector<double> blocktridiag_schur_psd_estimates(const BlockTriDiagMatrix& s);

}  // namespace fastdoc
