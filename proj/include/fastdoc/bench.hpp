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
#ifndef FASTDOC_BENCH_HPP_
#define FASTDOC_BENCH_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fastdoc/synthetic.hpp"
#include "fastdoc/types.hpp"

namespace fastdoc {

/// Control dimension rule used by the synthetic sweeps: m = ceil(n / 4),
/// at least 1.
int bench_control_dim(int state_dim);

/// One-dimension-at-a-time sweep configuration. Each sweep list varies one
/// dimension while the other two stay at their base values; an empty list
/// disables that sweep.
struct BenchConfig {
  std::vector<int> horizon_sweep = {50, 100, 200, 400, 800};
  std::vector<int> state_sweep = {8, 16, 32, 64};
  std::vector<int> param_sweep = {10, 50, 250};

  int base_horizon = 100;
  int base_state_dim = 16;
  int base_param_dim = 50;

  int trials = 20;
  std::uint64_t seed = 0;
  /// Any subset of {"fastdoc", "blocklu", "dense"}, run in the given order.
  std::vector<std::string> solvers = {"fastdoc", "blocklu"};
  double cond = 1e3;
  /// The dense solver is skipped (cells left empty) whenever the saddle
  /// dimension n_xi + n_rows exceeds this cap.
  int dense_cap = 5000;

  void validate() const;
};

/// One timed solver run. Nanosecond fields are -1 and rel_err is NaN when
/// that cell was not produced (solver skipped, solver has no step split, no
/// dense oracle, or the run errored). `error` holds the propagated solver
/// error message; it is not part of the CSV.
struct BenchRecord {
  std::string sweep;
  double varied_value = 0.0;
  std::string solver;
  int trial = 0;
  std::int64_t build_ns = -1;
  std::int64_t step1_ns = -1;
  std::int64_t step2_ns = -1;
  std::int64_t step3_ns = -1;
  std::int64_t step4_ns = -1;
  std::int64_t total_ns = -1;
  double rel_err = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

/// Runs every configured sweep point for `trials` trials and every enabled
/// solver. Instances come from gen_synthetic with seeds split off
/// cfg.seed, so the set of instances (and the error columns) depends only on
/// the configuration. Each (point, solver) gets one untimed warm-up before
/// its first trial; timed runs are strictly sequential. When csv_path is
/// nonempty the records are also written there.
///
/// Solver errors are recorded on the row and the sweep continues.
std::vector<BenchRecord> run_sweep(const BenchConfig& cfg,
                                   const std::string& csv_path = std::string());

/// Writes records in the fixed column order
///   sweep,varied_value,solver,trial,build_ns,step1_ns,step2_ns,step3_ns,
///   step4_ns,total_ns,rel_err
/// with floats at 17 significant digits and not-run cells left empty.
void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::string& path);

/// Inverse of write_bench_csv; the `error` field comes back empty.
std::vector<BenchRecord> parse_bench_csv(const std::string& path);

/// Geometric-mean speedups of fastdoc over a comparator at one sweep point.
/// NaN when the comparator (or the needed cells) are absent at that point.
struct SpeedupPoint {
  std::string sweep;
  double varied_value = 0.0;
  int pairs_blocklu = 0;
  int pairs_dense = 0;
  double total_vs_blocklu = std::numeric_limits<double>::quiet_NaN();
  /// Factorization-only ratio: steps 1+3 (the two block factorization
  /// phases). Undefined against dense, which has no step split.
  double factor_vs_blocklu = std::numeric_limits<double>::quiet_NaN();
  double total_vs_dense = std::numeric_limits<double>::quiet_NaN();
};

/// Per-sweep-point mean speedup of fastdoc over blocklu and over dense.
/// Ratios pair trials of the same (sweep, value); the mean is geometric.
/// Throws MissingPair when no fastdoc rows are present or no comparator row
/// matches any fastdoc trial.
std::vector<SpeedupPoint> speedup_summary(const std::vector<BenchRecord>& records);

}  // namespace fastdoc

#endif  // FASTDOC_BENCH_HPP_
