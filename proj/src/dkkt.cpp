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
#include "fastdoc/dkkt.hpp"

#include <sstream>

namespace fastdoc {

void DiffKktSystem::validate() const {
  const int n_stage = stage_count();
  if (static_cast<int>(param_cross.size()) != n_stage)
    throw DimensionMismatch("DiffKktSystem: param_cross count != stage count");
  if (constraint_cross.size() != rows.size())
    throw DimensionMismatch("DiffKktSystem: constraint_cross count != row block count");
  for (int k = 0; k < n_stage; ++k) {
    const Matrix& h = hessian.blocks[static_cast<std::size_t>(k)];
    if (h.rows() != h.cols())
      throw DimensionMismatch("DiffKktSystem: Hessian block not square");
    const Matrix& b = param_cross[static_cast<std::size_t>(k)];
    if (b.rows() != h.rows() || b.cols() != n_theta) {
      std::ostringstream os;
      os << "DiffKktSystem: param_cross block " << k << " is " << b.rows() << "x"
         << b.cols() << ", expected " << h.rows() << "x" << n_theta;
      throw DimensionMismatch(os.str());
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConstraintRowBlock& r = rows[i];
    if (r.stage < 0 || r.stage >= n_stage)
      throw DimensionMismatch("DiffKktSystem: row block stage out of range");
    if (r.on_stage.cols() != stage_dim(r.stage))
      throw DimensionMismatch("DiffKktSystem: on_stage column count mismatch");
    if (r.has_next()) {
      if (r.stage + 1 >= n_stage)
        throw DimensionMismatch("DiffKktSystem: on_next beyond the last stage");
      if (r.on_next.cols() != stage_dim(r.stage + 1) ||
          r.on_next.rows() != r.on_stage.rows())
        throw DimensionMismatch("DiffKktSystem: on_next shape mismatch");
    }
    const Matrix& c = constraint_cross[i];
    if (c.rows() != r.rows() || c.cols() != n_theta)
      throw DimensionMismatch("DiffKktSystem: constraint_cross shape mismatch");
    if (i > 0 && rows[i - 1].stage > r.stage)
      throw DimensionMismatch("DiffKktSystem: row blocks not sorted by stage");
    if (i > 1) {
      const ConstraintRowBlock& prev2 = rows[i - 2];
      const int prev2_last = prev2.stage + (prev2.has_next() ? 1 : 0);
      if (prev2_last >= r.stage)
        throw DimensionMismatch(
            "DiffKktSystem: row blocks two apart touch a common stage");
    }
  }
}

namespace {

std::vector<int> stage_offsets(const DiffKktSystem& s) {
  std::vector<int> off(static_cast<std::size_t>(s.stage_count()) + 1, 0);
  for (int k = 0; k < s.stage_count(); ++k)
    off[static_cast<std::size_t>(k) + 1] = off[static_cast<std::size_t>(k)] + s.stage_dim(k);
  return off;
}

}  // namespace

Matrix DiffKktSystem::dense_jacobian() const {
  const auto off = stage_offsets(*this);
  Matrix a = Matrix::Zero(total_constraint_rows(), total_primal());
  int row = 0;
  for (const auto& r : rows) {
    a.block(row, off[static_cast<std::size_t>(r.stage)], r.rows(), r.on_stage.cols()) =
        r.on_stage;
    if (r.has_next())
      a.block(row, off[static_cast<std::size_t>(r.stage) + 1], r.rows(),
              r.on_next.cols()) = r.on_next;
    row += r.rows();
  }
  return a;
}

Matrix DiffKktSystem::dense_param_cross() const {
  Matrix b = Matrix::Zero(total_primal(), n_theta);
  int row = 0;
  for (const auto& m : param_cross) {
    b.block(row, 0, m.rows(), m.cols()) = m;
    row += static_cast<int>(m.rows());
  }
  return b;
}

Matrix DiffKktSystem::dense_constraint_cross() const {
  Matrix c = Matrix::Zero(total_constraint_rows(), n_theta);
  int row = 0;
  for (const auto& m : constraint_cross) {
    c.block(row, 0, m.rows(), m.cols()) = m;
    row += static_cast<int>(m.rows());
  }
  return c;
}

}  // namespace fastdoc
