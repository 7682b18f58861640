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
#include "fastdoc/dense_factor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fastdoc {

namespace {

// Unblocked lower Cholesky of (a + mu*I), reading only the lower triangle.
// Returns false on a nonpositive pivot. Multiplications (including divisions
// and the square root) and additions are tallied separately so the classic
// n^3/3 + O(n^2) flop total is reproduced exactly.
template <bool COUNT>
bool chol_kernel(const Matrix& a, double mu, Matrix& l, std::uint64_t& mults,
                 std::uint64_t& adds) {
  const int n = static_cast<int>(a.rows());
  l.setZero(n, n);
  for (int j = 0; j < n; ++j) {
    double s = a(j, j) + mu;
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if constexpr (COUNT) {
      mults += static_cast<std::uint64_t>(j) + 1;  // j squares + sqrt
      adds += static_cast<std::uint64_t>(j);
    }
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    const double d = std::sqrt(s);
    l(j, j) = d;
    const double inv_d = 1.0 / d;
    for (int i = j + 1; i < n; ++i) {
      double t = a(i, j);
      for (int k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t * inv_d;
      if constexpr (COUNT) {
        mults += static_cast<std::uint64_t>(j) + 1;
        adds += static_cast<std::uint64_t>(j);
      }
    }
  }
  return true;
}

// Right-looking LU with partial pivoting on a copy of the input. Flop tally
// reproduces 2n^3/3 + O(n^2): one division per subdiagonal entry, one
// multiply-add per trailing update entry.
template <bool COUNT>
void lu_kernel(Matrix& a, std::vector<int>& perm, std::uint64_t& mults,
               std::uint64_t& adds, double pivot_tol) {
  const int n = static_cast<int>(a.rows());
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > pivot_tol)) {
      std::ostringstream os;
      os << "lu_factor: pivot " << best << " at column " << k
         << " below tolerance " << pivot_tol;
      throw SingularSystem(os.str());
    }
    if (p != k) {
      a.row(p).swap(a.row(k));
      std::swap(perm[p], perm[k]);
    }
    const double inv_piv = 1.0 / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      a(i, k) *= inv_piv;
      if constexpr (COUNT) ++mults;
    }
    for (int i = k + 1; i < n; ++i) {
      const double lik = a(i, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
      if constexpr (COUNT) {
        mults += static_cast<std::uint64_t>(n - k - 1);
        adds += static_cast<std::uint64_t>(n - k - 1);
      }
    }
  }
}

void check_square_symmetric(const Matrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(who) + ": matrix not square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    std::ostringstream os;
    os << who << ": matrix not symmetric (max asymmetry " << asym << ")";
    throw DimensionMismatch(os.str());
  }
}

}  // namespace

CholeskyFactor cholesky_factor(const Matrix& m, const RegPolicy& reg,
                               bool count_flops) {
  check_square_symmetric(m, "cholesky_factor");
  const int n = static_cast<int>(m.rows());
  CholeskyFactor f;
  f.lower.resize(n, n);
  if (n == 0) return f;

  double mu = 0.0;
  const int tries = reg.enabled ? reg.max_attempts + 1 : 1;
  for (int attempt = 0; attempt < tries; ++attempt) {
    std::uint64_t mults = 0, adds = 0;
    const bool ok = count_flops ? chol_kernel<true>(m, mu, f.lower, mults, adds)
                                : chol_kernel<false>(m, mu, f.lower, mults, adds);
    if (ok) {
      f.regularization_used = mu;
      f.factor_multiplies = mults;
      f.factor_adds = adds;
      return f;
    }
    if (attempt == 0) {
      mu = std::max(reg.floor, reg.scale * m.trace() / static_cast<double>(n));
    } else {
      mu *= reg.escalation;
    }
  }
  std::ostringstream os;
  os << "cholesky_factor: not positive definite";
  if (reg.enabled) os << " after shift " << mu / reg.escalation;
  throw NotPositiveDefinite(os.str());
}

Matrix cholesky_solve(const CholeskyFactor& f, const Matrix& rhs) {
  if (f.lower.rows() != rhs.rows())
    throw DimensionMismatch("cholesky_solve: rhs row count mismatch");
  Matrix x = rhs;
  f.lower.triangularView<Eigen::Lower>().solveInPlace(x);
  f.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix cholesky_inverse(const CholeskyFactor& f) {
  const int n = f.dim();
  Matrix linv = Matrix::Identity(n, n);
  f.lower.triangularView<Eigen::Lower>().solveInPlace(linv);
  Matrix out(n, n);
  out.setZero();
  out.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
  out.triangularView<Eigen::StrictlyUpper>() =
      out.transpose().triangularView<Eigen::StrictlyUpper>();
  return out;
}

LuFactor lu_factor(const Matrix& m, bool count_flops) {
  if (m.rows() != m.cols()) throw DimensionMismatch("lu_factor: matrix not square");
  LuFactor f;
  f.lu = m;
  const int n = static_cast<int>(m.rows());
  if (n == 0) return f;
  const double pivot_tol =
      m.cwiseAbs().maxCoeff() * static_cast<double>(n) *
      std::numeric_limits<double>::epsilon() * 1e-2;
  std::uint64_t mults = 0, adds = 0;
  if (count_flops)
    lu_kernel<true>(f.lu, f.perm, mults, adds, pivot_tol);
  else
    lu_kernel<false>(f.lu, f.perm, mults, adds, pivot_tol);
  f.factor_multiplies = mults;
  f.factor_adds = adds;
  return f;
}

Matrix lu_solve(const LuFactor& f, const Matrix& rhs) {
  if (f.lu.rows() != rhs.rows())
    throw DimensionMismatch("lu_solve: rhs row count mismatch");
  const int n = f.dim();
  Matrix x(n, rhs.cols());
  for (int i = 0; i < n; ++i) x.row(i) = rhs.row(f.perm[i]);
  f.lu.triangularView<Eigen::UnitLower>().solveInPlace(x);
  f.lu.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix lu_inverse(const LuFactor& f) {
  return lu_solve(f, Matrix::Identity(f.dim(), f.dim()));
}

}  // namespace fastdoc
