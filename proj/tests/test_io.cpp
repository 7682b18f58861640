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
#include "fastdoc/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fastdoc/deriv.hpp"
#include "fastdoc/synthetic.hpp"
#include "fastdoc/types.hpp"
#include "fastdoc/vehicle.hpp"

using namespace fastdoc;

namespace {

// Unique scratch directory per test run, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fastdoc_io_" + std::to_string(::getpid()) + "_" +
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

}  // namespace

TEST_CASE("read_file and write_file round-trip and create directories") {
  TempDir tmp;
  const std::string nested = tmp.file("a/b/c.txt");
  write_file(nested, "line1\nline2\n");
  CHECK(read_file(nested) == "line1\nline2\n");
  CHECK_THROWS_AS(read_file(tmp.file("missing.txt")), IoError);
}

TEST_CASE("instance files round-trip through JSON") {
  TempDir tmp;
  const DiffKktSystem sys = gen_synthetic(6, 3, 2, 4, 50.0, 991);
  InstanceFile inst;
  inst.horizon = 6;
  inst.state_dim = 3;
  inst.control_dim = 2;
  inst.system = sys;
  const std::string path = tmp.file("instance.json");
  save_instance(path, inst);

  const InstanceFile back = load_instance(path);
  CHECK(back.horizon == 6);
  CHECK(back.state_dim == 3);
  CHECK(back.control_dim == 2);
  REQUIRE_NOTHROW(back.system.validate());

  // The reconstructed system must describe the same derivative problem.
  const TrajectoryDerivatives a = dense_backward(sys);
  const TrajectoryDerivatives b = dense_backward(back.system);
  CHECK(rel_inf_error(a.dxi_dtheta, b.dxi_dtheta) == 0.0);
  CHECK(rel_inf_error(a.dlambda_dtheta, b.dlambda_dtheta) == 0.0);

  // A second save of the loaded instance is byte-identical: the writer is
  // canonical (sorted keys, shortest round-trip floats).
  const std::string path2 = tmp.file("instance2.json");
  save_instance(path2, back);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("instance loader rejects malformed input") {
  TempDir tmp;
  const std::string path = tmp.file("bad.json");
  write_file(path, "{ not json");
  CHECK_THROWS_AS(load_instance(path), IoError);
  write_file(path, "{\"dims\": {\"N\": 2}}");
  CHECK_THROWS_AS(load_instance(path), IoError);
  // Ragged matrix rows are rejected rather than silently truncated.
  write_file(path, R"({"dims": {"N": 1, "nx": 1, "nu": 1, "ntheta": 1},
    "blocks": {"H": [[[1.0],[2.0, 3.0]]], "A_diag": [], "A_super": [],
               "A_stage": [], "B": [], "C": []}})");
  CHECK_THROWS_AS(load_instance(path), IoError);
}

TEST_CASE("solution files round-trip") {
  TempDir tmp;
  SolutionFile sol;
  sol.horizon = 2;
  sol.state_dim = 2;
  sol.control_dim = 1;
  sol.theta = Vector::LinSpaced(3, -1.0, 1.0);
  sol.x_init = Vector::Constant(2, 0.25);
  sol.trajectory.xi = Vector::LinSpaced(8, 0.0, 7.0);
  sol.trajectory.lambda = Vector::LinSpaced(5, -2.0, 2.0);
  sol.trajectory.active_mask = {{true, false}, {}, {false, true, true}};
  sol.trajectory.kkt_residual = 3.5e-9;
  sol.trajectory.iterations = 7;
  const std::string path = tmp.file("solution.json");
  save_solution(path, sol);

  const SolutionFile back = load_solution(path);
  CHECK(back.horizon == 2);
  CHECK(back.theta.size() == 3);
  CHECK((back.theta - sol.theta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.trajectory.xi - sol.trajectory.xi).lpNorm<Eigen::Infinity>() ==
        0.0);
  CHECK(back.trajectory.active_mask == sol.trajectory.active_mask);
  CHECK(back.trajectory.kkt_residual == sol.trajectory.kkt_residual);
  CHECK(back.trajectory.iterations == 7);
}

TEST_CASE("bench config round-trips and rejects unknown keys") {
  TempDir tmp;
  BenchConfig cfg;
  cfg.horizon_sweep = {10, 20};
  cfg.state_sweep = {4, 8};
  cfg.param_sweep = {5};
  cfg.base_horizon = 10;
  cfg.base_state_dim = 4;
  cfg.base_param_dim = 5;
  cfg.trials = 3;
  cfg.seed = 77;
  cfg.solvers = {"fastdoc", "dense"};
  cfg.cond = 250.0;
  cfg.dense_cap = 1234;
  const std::string path = tmp.file("bench.json");
  save_bench_config(path, cfg);

  const BenchConfig back = load_bench_config(path);
  CHECK(back.horizon_sweep == cfg.horizon_sweep);
  CHECK(back.state_sweep == cfg.state_sweep);
  CHECK(back.param_sweep == cfg.param_sweep);
  CHECK(back.trials == 3);
  CHECK(back.seed == 77);
  CHECK(back.solvers == cfg.solvers);
  CHECK(back.cond == 250.0);
  CHECK(back.dense_cap == 1234);

  // Unspecified fields keep their defaults.
  write_file(path, "{\"trials\": 2}");
  const BenchConfig partial = load_bench_config(path);
  CHECK(partial.trials == 2);
  CHECK(partial.base_horizon == BenchConfig().base_horizon);

  // A typo in a key is an error, not a silently ignored setting.
  write_file(path, "{\"trails\": 2}");
  CHECK_THROWS_AS(load_bench_config(path), IoError);
}

TEST_CASE("demo files round-trip bitwise") {
  TempDir tmp;
  DemoOptions opts;
  opts.steps = 30;
  const Demo demo =
      generate_demo(demo_driver_params(), Scenario::curve, 0.01, 42, opts);
  const std::string path = tmp.file("demo.json");
  save_demo(path, demo);

  const Demo back = load_demo(path);
  CHECK(back.scenario == demo.scenario);
  CHECK(back.dt == demo.dt);
  CHECK(back.horizon == demo.horizon);
  CHECK(back.wheelbase == demo.wheelbase);
  REQUIRE(back.states.size() == demo.states.size());
  REQUIRE(back.controls.size() == demo.controls.size());
  REQUIRE(back.reference.points.size() == demo.reference.points.size());
  for (std::size_t i = 0; i < demo.states.size(); ++i)
    CHECK((back.states[i].to_vector() - demo.states[i].to_vector())
              .lpNorm<Eigen::Infinity>() == 0.0);
  for (std::size_t i = 0; i < demo.reference.points.size(); ++i) {
    CHECK((back.reference.points[i].state.to_vector() -
           demo.reference.points[i].state.to_vector())
              .lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(back.reference.points[i].u1 == demo.reference.points[i].u1);
    CHECK(back.reference.target_speed[i] == demo.reference.target_speed[i]);
  }

  // Save of the loaded demo reproduces the file byte for byte.
  const std::string path2 = tmp.file("demo2.json");
  save_demo(path2, back);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("personalization parameter files round-trip") {
  TempDir tmp;
  const PersonalizationParams theta = demo_driver_params();
  const std::string path = tmp.file("theta.json");
  save_params(path, theta);
  const PersonalizationParams back = load_params(path);
  CHECK((back.w - theta.w).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(back.D == theta.D);
  CHECK(back.alpha == theta.alpha);

  write_file(path, "{\"w\": [1, 2], \"D\": 10}");
  CHECK_THROWS_AS(load_params(path), IoError);
}

TEST_CASE("training CSV round-trips including theta snapshots") {
  TempDir tmp;
  TrainingLog log;
  for (int i = 0; i < 12; ++i) {
    TrainingIteration it;
    it.iter = i;
    it.loss = 1.0 / (1.0 + i);
    it.build_ns = 1000 + i;
    it.solve_ns = 2000 + i;
    if (i % 10 == 0 || i == 11) {
      it.has_theta = true;
      it.theta = Vector::LinSpaced(10, 0.1 * i, 0.1 * i + 1.0);
    }
    log.iterations.push_back(it);
  }
  log.final_theta = demo_driver_params();
  const std::string path = tmp.file("log.csv");
  write_training_csv(path, log);

  const std::string text = read_file(path);
  CHECK(text.rfind("iter,loss,build_ns,solve_ns,theta_json\n", 0) == 0);

  const std::vector<TrainingIteration> rows = parse_training_csv(path).iterations;
  REQUIRE(rows.size() == 12);
  CHECK(rows[3].loss == 0.25);
  CHECK(rows[0].has_theta);
  CHECK(rows[10].has_theta);
  CHECK(rows[11].has_theta);
  CHECK_FALSE(rows[5].has_theta);
  CHECK((rows[11].theta - log.iterations[11].theta)
            .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("strip_timing_columns removes exactly the _ns columns") {
  const std::string csv =
      "iter,loss,build_ns,solve_ns,theta_json\n"
      "0,0.5,123,456,\"[1.0,2.0]\"\n"
      "1,0.25,789,12,\n";
  const std::string stripped = strip_timing_columns(csv);
  CHECK(stripped ==
        "iter,loss,theta_json\n"
        "0,0.5,\"[1.0,2.0]\"\n"
        "1,0.25,\n");

  // Two files that differ only in timing agree after stripping.
  const std::string other =
      "iter,loss,build_ns,solve_ns,theta_json\n"
      "0,0.5,999,888,\"[1.0,2.0]\"\n"
      "1,0.25,7,6,\n";
  CHECK(strip_timing_columns(other) == stripped);

  // Quoted commas survive the split.
  const std::string quoted = "a,b_ns,c\n\"x,y\",5,z\n";
  CHECK(strip_timing_columns(quoted) == "a,c\n\"x,y\",z\n");
}

TEST_CASE("fnv1a64 matches the reference values") {
  // Reference digests for the 64-bit FNV-1a parameters
  // (offset 14695981039346656037, prime 1099511628211).
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("input_content_hash depends on every ingredient") {
  TempDir tmp;
  const std::string f = tmp.file("input.txt");
  write_file(f, "payload");
  const std::string h0 = input_content_hash("bench", "{}", {f});
  CHECK(h0.rfind("fnv1a64:", 0) == 0);
  CHECK(h0.size() == 8 + 16);
  CHECK(input_content_hash("verify", "{}", {f}) != h0);
  CHECK(input_content_hash("bench", "{\"a\":1}", {f}) != h0);
  write_file(f, "payload2");
  CHECK(input_content_hash("bench", "{}", {f}) != h0);
  CHECK(input_content_hash("bench", "{}", {}) != h0);
}

TEST_CASE("manifests round-trip and keep a canonical parameter dump") {
  TempDir tmp;
  RunManifest m;
  m.command = "demo";
  m.config_path = "conf.json";
  m.seed = 31;
  m.out_dir = "out";
  m.timestamp = "2026-01-02T03:04:05Z";
  m.parameters_json = "{\"mode\":\"gen\",\"noise\":0.5,\"seed\":31}";
  m.input_hash = input_content_hash("demo", m.parameters_json, {});
  m.outputs.push_back({"demo.json", CompareRule::exact});
  m.outputs.push_back({"log.csv", CompareRule::strip_timing});
  m.outputs.push_back({"summary.json", CompareRule::ignore});
  const std::string path = tmp.file("manifest.json");
  save_manifest(path, m);

  const RunManifest back = load_manifest(path);
  CHECK(back.command == m.command);
  CHECK(back.config_path == m.config_path);
  CHECK(back.seed == 31);
  CHECK(back.out_dir == "out");
  CHECK(back.timestamp == m.timestamp);
  CHECK(back.input_hash == m.input_hash);
  // The parameter object survives the parse/dump cycle byte for byte, so
  // hashes recomputed from a loaded manifest stay valid.
  CHECK(back.parameters_json == m.parameters_json);
  REQUIRE(back.outputs.size() == 3);
  CHECK(back.outputs[0].file == "demo.json");
  CHECK(back.outputs[0].compare == CompareRule::exact);
  CHECK(back.outputs[1].compare == CompareRule::strip_timing);
  CHECK(back.outputs[2].compare == CompareRule::ignore);
}
