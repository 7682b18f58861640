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
#ifndef FASTDOC_CLI_HPP_
#define FASTDOC_CLI_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fastdoc {

/// Exit-code vocabulary shared by every command:
///   0 success, 1 configuration or IO failure, 2 partial failure (errored
///   benchmark trials, aborted training), 3 verification failure (threshold
///   or replay mismatch).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitVerify = 3;

/// `bench`: run the benchmark sweeps and write results.csv, summary.json and
/// manifest.json into the output directory.
struct BenchCommand {
  std::string config_path;             // empty: built-in defaults
  std::string out_dir = "fastdoc_out";
  std::vector<std::string> solvers;    // empty: keep the config's list
  std::optional<std::uint64_t> seed;   // overrides the config seed
  bool quiet = false;
};
int cmd_bench(const BenchCommand& cmd);

/// `verify`: cross-check the structured backward pass against the dense
/// oracle on seeded synthetic systems, and against finite differences on
/// smooth OCP instances (one per five synthetic instances). Writes
/// verify_report.json and manifest.json.
struct VerifyCommand {
  int instances = 100;
  std::uint64_t seed = 0;
  int max_horizon = 200;
  int max_state = 64;
  int max_param = 100;
  /// Hidden testing hook: when nonnegative it replaces both pass thresholds
  /// (dense 1e-6, finite differences 1e-4).
  double force_threshold = -1.0;
  std::string out_dir = "fastdoc_out";
  bool quiet = false;
};
int cmd_verify(const VerifyCommand& cmd);

/// `demo`: either generate a synthetic demonstration (--gen-demo) or train
/// on an existing one (--train <file>). Generation writes demo.json;
/// training writes training_log.csv and theta_final.json. Both write
/// manifest.json.
struct DemoCommand {
  std::string scenario = "straight";  // generation only; training follows the file
  bool gen_demo = false;
  std::string train_path;             // demo JSON to train on
  std::string theta_star_path;        // parameter JSON; empty: built-in profile
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "fastdoc_out";
  bool quiet = false;
};
int cmd_demo(const DemoCommand& cmd);

/// `replay`: re-run the command recorded in a manifest into a fresh
/// directory and compare the outputs against the original run, with timing
/// columns stripped from CSVs. Exit 0 when every compared file matches.
struct ReplayCommand {
  std::string manifest_path;
  std::string out_dir;  // empty: "<original out_dir>_replay"
  bool quiet = false;
};
int cmd_replay(const ReplayCommand& cmd);

}  // namespace fastdoc

#endif  // FASTDOC_CLI_HPP_
