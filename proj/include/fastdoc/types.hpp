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

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fastdoc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/// A diagonal pivot stayed nonpositive after the maximum regularization shift.
/// `block_index` identifies the offending block when raised from a block
/// operation (-1 otherwise); `step` tags the pipeline step for backward-pass
/// failures (0 otherwise).
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& msg, int block_index = -1, int step = 0)
      : Error(msg), block_index(block_index), step(step) {}
  int block_index;
  int step;
};

class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& msg, int block_index = -1)
      : Error(msg), block_index(block_index) {}
  int block_index;
};

class JacobianMismatch : public Error {
 public:
  explicit JacobianMismatch(const std::string& msg) : Error(msg) {}
};

class MaxIterations : public Error {
 public:
  MaxIterations(const std::string& msg, double last_residual)
      : Error(msg), last_residual(last_residual) {}
  double last_residual;
};

class LineSearchFailure : public Error {
 public:
  explicit LineSearchFailure(const std::string& msg) : Error(msg) {}
};

class InfeasibleActiveSet : public Error {
 public:
  explicit InfeasibleActiveSet(const std::string& msg) : Error(msg) {}
};

class ActiveSetChanged : public Error {
 public:
  explicit ActiveSetChanged(const std::string& msg) : Error(msg) {}
};

class RankDeficientSample : public Error {
 public:
  explicit RankDeficientSample(const std::string& msg) : Error(msg) {}
};

class GradientNonFinite : public Error {
 public:
  explicit GradientNonFinite(const std::string& msg) : Error(msg) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& msg) : Error(msg) {}
};

class SteeringSingularity : public Error {
 public:
  explicit SteeringSingularity(const std::string& msg) : Error(msg) {}
};

class NegativeWeight : public Error {
 public:
  explicit NegativeWeight(const std::string& msg) : Error(msg) {}
};

class MissingPair : public Error {
 public:
  explicit MissingPair(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// True iff every entry of `m` is finite.
inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Throws DimensionMismatch with `what` unless `cond` holds.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw DimensionMismatch(what);
}

/// Relative infinity-norm discrepancy, normalized as |a - b|_inf / (1 + |b|_inf).
inline double rel_inf_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("rel_inf_error: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

}  // namespace fastdoc
