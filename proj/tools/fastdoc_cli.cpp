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

// Command-line front end. All the logic lives in the library (fastdoc/cli.hpp)
// so the subcommands stay testable in-process; this file only parses argv.

#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "fastdoc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Structured backward pass for differentiable optimal control"};
  app.require_subcommand(1);
  // Let --seed/--out/--quiet appear after the subcommand name as well.
  app.fallthrough();

  // Global options, shared by every subcommand.
  std::string out_dir = "fastdoc_out";
  bool quiet = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--out", out_dir, "Output directory (created if missing)")
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Suppress progress output");
  app.add_option("--seed", seed, "Root seed for all randomized work")
      ->each([&](const std::string&) { seed_given = true; });

  fastdoc::BenchCommand bench;
  CLI::App* b = app.add_subcommand("bench", "Run the runtime benchmark sweeps");
  b->add_option("--config", bench.config_path,
                "Benchmark config JSON (defaults are used when omitted)");
  b->add_option("--solvers", bench.solvers,
                "Override the solver list (fastdoc, blocklu, dense)")
      ->delimiter(',');

  fastdoc::VerifyCommand verify;
  CLI::App* v = app.add_subcommand(
      "verify", "Cross-check the backward pass against reference solvers");
  v->add_option("--instances", verify.instances, "Number of synthetic instances")
      ->capture_default_str();
  v->add_option("--max-horizon", verify.max_horizon, "Largest horizon drawn")
      ->capture_default_str();
  v->add_option("--max-state", verify.max_state, "Largest state dimension drawn")
      ->capture_default_str();
  v->add_option("--max-param", verify.max_param,
                "Largest parameter dimension drawn")
      ->capture_default_str();
  v->add_option("--force-threshold", verify.force_threshold,
                "Replace both pass thresholds (testing hook)")
      ->group("");

  fastdoc::DemoCommand demo;
  CLI::App* d = app.add_subcommand(
      "demo", "Generate driving demonstrations or train on them");
  d->add_flag("--gen-demo", demo.gen_demo, "Generate a demonstration file");
  d->add_option("--train", demo.train_path,
                "Train on the given demonstration JSON");
  d->add_option("--scenario", demo.scenario, "straight or curve (generation)")
      ->capture_default_str();
  d->add_option("--noise", demo.noise, "Measurement noise scale (generation)")
      ->capture_default_str();
  d->add_option("--theta-star", demo.theta_star_path,
                "Parameter JSON used to generate the demonstration");

  fastdoc::ReplayCommand replay;
  CLI::App* r = app.add_subcommand(
      "replay", "Re-run a recorded manifest and compare the outputs");
  r->add_option("manifest", replay.manifest_path, "Path to manifest.json")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (b->parsed()) {
    bench.out_dir = out_dir;
    bench.quiet = quiet;
    if (seed_given) bench.seed = seed;
    return fastdoc::cmd_bench(bench);
  }
  if (v->parsed()) {
    verify.out_dir = out_dir;
    verify.quiet = quiet;
    verify.seed = seed;
    return fastdoc::cmd_verify(verify);
  }
  if (d->parsed()) {
    demo.out_dir = out_dir;
    demo.quiet = quiet;
    demo.seed = seed;
    return fastdoc::cmd_demo(demo);
  }
  replay.out_dir = out_dir == "fastdoc_out" ? "" : out_dir;
  replay.quiet = quiet;
  return fastdoc::cmd_replay(replay);
}
