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
#include "fastdoc/block_matrix.hpp"

#include <algorithm>
#include <sstream>

namespace fastdoc {

void BlockTriDiagMatrix::validate(double sym_tol) const {
  const int m = block_count();
  if (static_cast<int>(sub.size()) != std::max(0, m - 1)) {
    std::ostringstream os;
    os << "BlockTriDiagMatrix: " << m << " diagonal blocks require "
       << std::max(0, m - 1) << " subdiagonal blocks, got " << sub.size();
    throw DimensionMismatch(os.str());
  }
  for (int r = 0; r < m; ++r) {
    const Matrix& d = diag[static_cast<std::size_t>(r)];
    if (d.rows() != d.cols())
      throw DimensionMismatch("BlockTriDiagMatrix: diagonal block not square");
    if (d.size() > 0) {
      const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
      if ((d - d.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
        throw DimensionMismatch("BlockTriDiagMatrix: diagonal block not symmetric");
    }
  }
  for (int r = 0; r + 1 < m; ++r) {
    const Matrix& s = sub[static_cast<std::size_t>(r)];
    if (s.rows() != diag[static_cast<std::size_t>(r) + 1].rows() ||
        s.cols() != diag[static_cast<std::size_t>(r)].rows()) {
      std::ostringstream os;
      os << "BlockTriDiagMatrix: sub block " << r << " is " << s.rows() << "x"
         << s.cols() << ", expected " << diag[static_cast<std::size_t>(r) + 1].rows()
         << "x" << diag[static_cast<std::size_t>(r)].rows();
      throw DimensionMismatch(os.str());
    }
  }
}

Matrix BlockTriDiagMatrix::to_dense() const {
  validate();
  const int d = total_dim();
  Matrix out = Matrix::Zero(d, d);
  int off = 0;
  for (int r = 0; r < block_count(); ++r) {
    const int n = static_cast<int>(diag[static_cast<std::size_t>(r)].rows());
    out.block(off, off, n, n) = diag[static_cast<std::size_t>(r)];
    if (r + 1 < block_count()) {
      const Matrix& s = sub[static_cast<std::size_t>(r)];
      out.block(off + n, off, s.rows(), s.cols()) = s;
      out.block(off, off + n, s.cols(), s.rows()) = s.transpose();
    }
    off += n;
  }
  return out;
}

}  // namespace fastdoc
