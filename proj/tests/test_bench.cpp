// Copyright 2026 The FastDOC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "fastdoc/bench.hpp"

using namespace fastdoc;

namespace {

BenchConfig tiny_config() {
  BenchConfig cfg;
  cfg.horizon_sweep = {4};
  cfg.state_sweep.clear();
  cfg.param_sweep.clear();
  cfg.base_state_dim = 4;
  cfg.base_param_dim = 3;
  cfg.trials = 2;
  cfg.seed = 42;
  cfg.solvers = {"fastdoc", "blocklu", "dense"};
  return cfg;
}

BenchRecord stub_record(const std::string& solver, int trial, std::int64_t total,
                        std::int64_t s1, std::int64_t s3) {
  BenchRecord r;
  r.sweep = "horizon";
  r.varied_value = 10.0;
  r.solver = solver;
  r.trial = trial;
  r.build_ns = 1;
  r.step1_ns = s1;
  r.step2_ns = 1;
  r.step3_ns = s3;
  r.step4_ns = 1;
  r.total_ns = total;
  return r;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/fastdoc_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("bench_control_dim rounds up with a floor of one") {
  CHECK(bench_control_dim(1) == 1);
  CHECK(bench_control_dim(4) == 1);
  CHECK(bench_control_dim(5) == 2);
  CHECK(bench_control_dim(16) == 4);
  CHECK(bench_control_dim(18) == 5);
}

TEST_CASE("run_sweep with a single point, trial and solver yields one record") {
  BenchConfig cfg = tiny_config();
  cfg.trials = 1;
  cfg.solvers = {"fastdoc"};
  const auto records = run_sweep(cfg);
  REQUIRE(records.size() == 1);
  CHECK(records[0].sweep == "horizon");
  CHECK(records[0].varied_value == 4.0);
  CHECK(records[0].solver == "fastdoc");
  CHECK(records[0].trial == 0);
  CHECK(records[0].total_ns >= 0);
  CHECK(records[0].build_ns >= 0);
  CHECK(records[0].error.empty());
  CHECK(std::isnan(records[0].rel_err));  // no dense oracle in the set
}

TEST_CASE("run_sweep fills the error column against the dense oracle") {
  const auto records = run_sweep(tiny_config());
  REQUIRE(records.size() == 6);  // 1 point x 2 trials x 3 solvers
  for (const BenchRecord& r : records) {
    CAPTURE(r.solver);
    CAPTURE(r.trial);
    CHECK(r.error.empty());
    CHECK(r.total_ns >= 0);
    REQUIRE_FALSE(std::isnan(r.rel_err));
    if (r.solver == "dense") {
      CHECK(r.rel_err == 0.0);
      CHECK(r.step1_ns == -1);  // dense has no step split
    } else {
      CHECK(r.rel_err < 1e-6);
      CHECK(r.step1_ns >= 0);
      CHECK(r.step2_ns >= 0);
      CHECK(r.step3_ns >= 0);
      CHECK(r.step4_ns >= 0);
    }
  }
}

TEST_CASE("error columns are deterministic in (config, seed)") {
  const auto a = run_sweep(tiny_config());
  const auto b = run_sweep(tiny_config());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].solver == b[i].solver);
    CHECK(a[i].rel_err == b[i].rel_err);  // bitwise: same instances, same math
  }
}

TEST_CASE("the dense cap leaves dense rows empty but keeps the sweep going") {
  BenchConfig cfg = tiny_config();
  cfg.dense_cap = 10;  // far below the instance size
  const auto records = run_sweep(cfg);
  REQUIRE(records.size() == 6);
  for (const BenchRecord& r : records) {
    if (r.solver == "dense") {
      CHECK(r.total_ns == -1);
      CHECK(r.build_ns == -1);
      CHECK(std::isnan(r.rel_err));
    } else {
      CHECK(r.total_ns >= 0);
      CHECK(std::isnan(r.rel_err));  // oracle did not run
    }
  }
}

TEST_CASE("CSV round-trip reproduces the records") {
  TempFile tmp("bench_roundtrip.csv");
  BenchConfig cfg = tiny_config();
  const auto records = run_sweep(cfg, tmp.path);
  const auto parsed = parse_bench_csv(tmp.path);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CAPTURE(i);
    CHECK(parsed[i].sweep == records[i].sweep);
    CHECK(parsed[i].varied_value == records[i].varied_value);
    CHECK(parsed[i].solver == records[i].solver);
    CHECK(parsed[i].trial == records[i].trial);
    CHECK(parsed[i].build_ns == records[i].build_ns);
    CHECK(parsed[i].step1_ns == records[i].step1_ns);
    CHECK(parsed[i].step2_ns == records[i].step2_ns);
    CHECK(parsed[i].step3_ns == records[i].step3_ns);
    CHECK(parsed[i].step4_ns == records[i].step4_ns);
    CHECK(parsed[i].total_ns == records[i].total_ns);
    if (std::isnan(records[i].rel_err))
      CHECK(std::isnan(parsed[i].rel_err));
    else
      CHECK(parsed[i].rel_err == records[i].rel_err);  // 17 digits: exact
  }
}

TEST_CASE("speedup_summary on injected timings") {
  std::vector<BenchRecord> records;
  for (int t = 0; t < 3; ++t) {
    records.push_back(stub_record("fastdoc", t, 100, 30, 30));
    records.push_back(stub_record("blocklu", t, 200, 70, 50));
  }
  const auto summary = speedup_summary(records);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].pairs_blocklu == 3);
  CHECK(summary[0].pairs_dense == 0);
  CHECK(summary[0].total_vs_blocklu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(summary[0].factor_vs_blocklu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isnan(summary[0].total_vs_dense));

  // Equal timings: speedup exactly one.
  std::vector<BenchRecord> equal;
  equal.push_back(stub_record("fastdoc", 0, 500, 100, 200));
  equal.push_back(stub_record("blocklu", 0, 500, 100, 200));
  const auto unity = speedup_summary(equal);
  CHECK(unity[0].total_vs_blocklu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(unity[0].factor_vs_blocklu == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("speedup_summary throws MissingPair without a comparator") {
  std::vector<BenchRecord> only_fastdoc{stub_record("fastdoc", 0, 100, 30, 30)};
  CHECK_THROWS_AS(speedup_summary(only_fastdoc), MissingPair);
  std::vector<BenchRecord> only_blocklu{stub_record("blocklu", 0, 100, 30, 30)};
  CHECK_THROWS_AS(speedup_summary(only_blocklu), MissingPair);
  CHECK_THROWS_AS(speedup_summary({}), MissingPair);
}

TEST_CASE("config validation rejects bad settings") {
  BenchConfig cfg = tiny_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), DimensionMismatch);
  cfg = tiny_config();
  cfg.solvers = {"simplex"};
  CHECK_THROWS_AS(cfg.validate(), DimensionMismatch);
  cfg = tiny_config();
  cfg.horizon_sweep = {0};
  CHECK_THROWS_AS(cfg.validate(), DimensionMismatch);
  cfg = tiny_config();
  cfg.cond = 0.5;
  CHECK_THROWS_AS(cfg.validate(), DimensionMismatch);
}
