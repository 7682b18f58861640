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
#include "fastdoc/cli.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>

#include "doctest.h"
#include "fastdoc/io.hpp"
#include "fastdoc/vehicle.hpp"

using namespace fastdoc;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fastdoc_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static inline int counter = 0;
};

BenchConfig tiny_bench_config() {
  BenchConfig cfg;
  cfg.horizon_sweep = {6};
  cfg.state_sweep = {3};
  cfg.param_sweep = {4};
  cfg.base_horizon = 6;
  cfg.base_state_dim = 3;
  cfg.base_param_dim = 4;
  cfg.trials = 2;
  cfg.seed = 5;
  cfg.solvers = {"fastdoc", "dense"};
  return cfg;
}

}  // namespace

TEST_CASE("cmd_bench writes the CSV, summary and manifest") {
  TempDir tmp;
  save_bench_config(tmp.file("cfg.json"), tiny_bench_config());

  BenchCommand cmd;
  cmd.config_path = tmp.file("cfg.json");
  cmd.out_dir = tmp.file("out");
  cmd.quiet = true;
  REQUIRE(cmd_bench(cmd) == kExitOk);

  const std::string csv = read_file(tmp.file("out/results.csv"));
  CHECK(csv.rfind("sweep,varied_value,solver,trial,build_ns,step1_ns,"
                  "step2_ns,step3_ns,step4_ns,total_ns,rel_err\n",
                  0) == 0);
  // fastdoc rows carry a dense cross-check error well under threshold.
  const TrainingLog unused;  // silence unused-include warnings on some setups
  (void)unused;
  for (const BenchRecord& r : parse_bench_csv(tmp.file("out/results.csv"))) {
    CHECK(r.error.empty());
    if (r.solver == "fastdoc") CHECK(r.rel_err < 1e-6);
  }

  const RunManifest m = load_manifest(tmp.file("out/manifest.json"));
  CHECK(m.command == "bench");
  CHECK(m.outputs.size() == 2);
  CHECK(std::filesystem::exists(tmp.file("out/summary.json")));
}

TEST_CASE("cmd_bench rejects a missing or malformed config") {
  TempDir tmp;
  BenchCommand cmd;
  cmd.config_path = tmp.file("absent.json");
  cmd.out_dir = tmp.file("out");
  cmd.quiet = true;
  CHECK(cmd_bench(cmd) == kExitConfig);

  write_file(tmp.file("bad.json"), "{\"trials\": \"many\"}");
  cmd.config_path = tmp.file("bad.json");
  CHECK(cmd_bench(cmd) == kExitConfig);
}

TEST_CASE("cmd_verify passes at the stock thresholds and honors the hook") {
  TempDir tmp;
  VerifyCommand cmd;
  cmd.instances = 6;
  cmd.seed = 21;
  cmd.out_dir = tmp.file("v");
  cmd.quiet = true;
  CHECK(cmd_verify(cmd) == kExitOk);
  CHECK(std::filesystem::exists(tmp.file("v/verify_report.json")));
  CHECK(std::filesystem::exists(tmp.file("v/manifest.json")));

  // The hidden hook replaces the thresholds; zero can never pass, which
  // exercises the failure path end to end.
  cmd.out_dir = tmp.file("v_fail");
  cmd.force_threshold = 0.0;
  CHECK(cmd_verify(cmd) == kExitVerify);

  // No work requested is a successful no-op.
  cmd.out_dir = tmp.file("v_empty");
  cmd.force_threshold = -1.0;
  cmd.instances = 0;
  CHECK(cmd_verify(cmd) == kExitOk);
}

TEST_CASE("cmd_demo generates, trains and replays") {
  TempDir tmp;

  DemoCommand gen;
  gen.scenario = "straight";
  gen.gen_demo = true;
  gen.seed = 9;
  gen.out_dir = tmp.file("gen");
  gen.quiet = true;
  REQUIRE(cmd_demo(gen) == kExitOk);

  const Demo demo = load_demo(tmp.file("gen/demo.json"));
  CHECK(demo.scenario == Scenario::straight);
  CHECK(demo.steps() == 150);
  CHECK(demo.states.size() == 151);

  // Training follows the demonstration file. A short synthetic demo keeps
  // the in-process run fast; the full-length defaults run in acceptance.
  DemoOptions opts;
  opts.steps = 40;
  const Demo short_demo =
      generate_demo(demo_driver_params(), Scenario::straight, 0.0, 9, opts);
  save_demo(tmp.file("short.json"), short_demo);

  DemoCommand train;
  train.gen_demo = false;
  train.train_path = tmp.file("short.json");
  train.out_dir = tmp.file("trained");
  train.quiet = true;
  REQUIRE(cmd_demo(train) == kExitOk);

  const TrainingLog log = parse_training_csv(tmp.file("trained/training_log.csv"));
  REQUIRE(!log.iterations.empty());
  CHECK(log.iterations.front().iter == 0);
  CHECK(log.iterations.back().loss < log.iterations.front().loss);
  const PersonalizationParams final_theta =
      load_params(tmp.file("trained/theta_final.json"));
  CHECK(final_theta.w.size() == PersonalizationParams::initial().w.size());

  // Replaying the training run reproduces the losses bitwise (timing aside).
  ReplayCommand rep;
  rep.manifest_path = tmp.file("trained/manifest.json");
  rep.out_dir = tmp.file("trained_replay");
  rep.quiet = true;
  REQUIRE(cmd_replay(rep) == kExitOk);
  CHECK(strip_timing_columns(read_file(tmp.file("trained/training_log.csv"))) ==
        strip_timing_columns(
            read_file(tmp.file("trained_replay/training_log.csv"))));
  CHECK(read_file(tmp.file("trained/theta_final.json")) ==
        read_file(tmp.file("trained_replay/theta_final.json")));
}

TEST_CASE("cmd_demo rejects bad invocations") {
  TempDir tmp;
  DemoCommand cmd;
  cmd.out_dir = tmp.file("out");
  cmd.quiet = true;
  // Neither --gen-demo nor --train.
  CHECK(cmd_demo(cmd) == kExitConfig);
  // Both at once.
  cmd.gen_demo = true;
  cmd.train_path = tmp.file("x.json");
  CHECK(cmd_demo(cmd) == kExitConfig);
  // Unknown scenario.
  cmd.train_path.clear();
  cmd.scenario = "figure-eight";
  CHECK(cmd_demo(cmd) == kExitConfig);
  // Training on a missing file.
  cmd.gen_demo = false;
  cmd.scenario = "straight";
  cmd.train_path = tmp.file("absent.json");
  CHECK(cmd_demo(cmd) == kExitConfig);
}

TEST_CASE("cmd_replay detects edited inputs and output drift") {
  TempDir tmp;
  save_bench_config(tmp.file("cfg.json"), tiny_bench_config());

  BenchCommand bench;
  bench.config_path = tmp.file("cfg.json");
  bench.out_dir = tmp.file("run");
  bench.quiet = true;
  REQUIRE(cmd_bench(bench) == kExitOk);

  ReplayCommand rep;
  rep.manifest_path = tmp.file("run/manifest.json");
  rep.out_dir = tmp.file("run_replay");
  rep.quiet = true;
  CHECK(cmd_replay(rep) == kExitOk);

  // Tampering with a recorded output makes the comparison fail.
  std::string csv = read_file(tmp.file("run/results.csv"));
  csv.replace(csv.find("fastdoc"), 7, "fastdoX");
  write_file(tmp.file("run/results.csv"), csv);
  rep.out_dir = tmp.file("run_replay2");
  CHECK(cmd_replay(rep) == kExitVerify);

  // Editing the config file invalidates the input hash before any rerun.
  BenchConfig cfg = tiny_bench_config();
  cfg.trials = 3;
  save_bench_config(tmp.file("cfg.json"), cfg);
  CHECK(cmd_replay(rep) == kExitConfig);

  // A manifest that never existed.
  rep.manifest_path = tmp.file("absent/manifest.json");
  CHECK(cmd_replay(rep) == kExitConfig);
}

TEST_CASE("verify draws respect the dimension caps") {
  TempDir tmp;
  VerifyCommand cmd;
  cmd.instances = 4;
  cmd.seed = 77;
  cmd.max_horizon = 12;
  cmd.max_state = 6;
  cmd.max_param = 3;
  cmd.out_dir = tmp.file("v");
  cmd.quiet = true;
  CHECK(cmd_verify(cmd) == kExitOk);

  // Invalid limits are a configuration error.
  cmd.max_state = 1;
  CHECK(cmd_verify(cmd) == kExitConfig);
}
