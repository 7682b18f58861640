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
#ifndef FASTDOC_IO_HPP_
#define FASTDOC_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fastdoc/bench.hpp"
#include "fastdoc/dkkt.hpp"
#include "fastdoc/ocp.hpp"
#include "fastdoc/vehicle.hpp"

namespace fastdoc {

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes (replaces) a file; throws IoError on failure. Parent directories
/// are created as needed.
void write_file(const std::string& path, const std::string& content);

// --------------------------------------------------------------------------
// Instance files. One JSON schema covers both flavors: every file carries
// "dims" {"N", "nx", "nu", "ntheta"}; benchmark instances add "blocks"
// {"H", "A_diag", "A_super", "A_stage", "B", "C"} with matrices as nested
// row-major arrays, while solved OCP instances add "theta", "x_init", "xi",
// "lambda" and "active_mask".
// --------------------------------------------------------------------------

/// Benchmark instance: a raw differential KKT system plus the generating
/// dimensions.
struct InstanceFile {
  int horizon = 0;
  int state_dim = 0;
  int control_dim = 0;
  DiffKktSystem system;
};

void save_instance(const std::string& path, const InstanceFile& inst);
InstanceFile load_instance(const std::string& path);

/// Solved OCP instance: the inputs identifying the solve and its primal-dual
/// result. The callbacks themselves are not serializable; files of this
/// flavor describe a solution, not a re-runnable problem.
struct SolutionFile {
  int horizon = 0;
  int state_dim = 0;
  int control_dim = 0;
  Vector theta;
  Vector x_init;
  SolvedTrajectory trajectory;
};

void save_solution(const std::string& path, const SolutionFile& sol);
SolutionFile load_solution(const std::string& path);

// --------------------------------------------------------------------------
// Benchmark configuration, mirroring BenchConfig field for field. Absent
// keys keep their defaults; unknown keys raise IoError to catch typos.
// --------------------------------------------------------------------------

BenchConfig load_bench_config(const std::string& path);
void save_bench_config(const std::string& path, const BenchConfig& cfg);

// --------------------------------------------------------------------------
// Demonstrations: JSON with "scenario", "dt", "states" (7-vectors),
// "controls" (2-vectors) and "tau_ref". Feature targets depend on the
// current (D, alpha) during training, so "tau_ref" stores the reference data
// they are derived from: one record [X, Y, phi, v, a, delta, delta_rate, u1]
// per reference sample. "horizon", "wheelbase" and "target_speed" round-trip
// the remaining Demo fields.
// --------------------------------------------------------------------------

void save_demo(const std::string& path, const Demo& demo);
Demo load_demo(const std::string& path);

/// Personalization parameters as {"w": [...], "D": ..., "alpha": ...}.
void save_params(const std::string& path, const PersonalizationParams& theta);
PersonalizationParams load_params(const std::string& path);

// --------------------------------------------------------------------------
// Training log CSV: columns iter,loss,build_ns,solve_ns,theta_json. The
// theta_json cell is a quoted JSON array on snapshot rows and empty
// otherwise.
// --------------------------------------------------------------------------

void write_training_csv(const std::string& path, const TrainingLog& log);
TrainingLog parse_training_csv(const std::string& path);

// --------------------------------------------------------------------------
// Run manifests. Every command writes one next to its outputs; replaying a
// manifest re-runs the command from the recorded parameters and compares the
// freshly produced outputs against the originals with timing stripped.
// --------------------------------------------------------------------------

/// How an output participates in a replay comparison.
///   exact        - byte-for-byte equality
///   strip_timing - CSV compared with *_ns columns removed
///   ignore       - produced but not compared (timing-derived or stamped)
enum class CompareRule { exact, strip_timing, ignore };

std::string compare_rule_name(CompareRule rule);
CompareRule compare_rule_from_name(const std::string& name);

struct ManifestOutput {
  std::string file;  // relative to the run's output directory
  CompareRule compare = CompareRule::exact;
};

struct RunManifest {
  std::string command;             // bench | verify | demo
  std::string config_path;         // primary input file, "" when none
  std::uint64_t seed = 0;
  std::string input_hash;          // content hash of parameters + input files
  std::string out_dir;
  std::string timestamp;           // ISO 8601 UTC; not part of the hash
  std::string parameters_json;     // canonical non-timing parameter dump
  std::vector<ManifestOutput> outputs;
};

void save_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Content hash covering the command, its canonical parameter dump and the
/// bytes of every listed input file, formatted "fnv1a64:<16 hex digits>".
std::string input_content_hash(const std::string& command,
                               const std::string& parameters_json,
                               const std::vector<std::string>& input_files);

/// Removes every column whose header name ends in "_ns" from a CSV text.
/// Quoted cells (RFC 4180 style, "" escaping) pass through unsplit, so JSON
/// cells survive. Throws IoError on a malformed header or ragged row.
std::string strip_timing_columns(const std::string& csv_text);

}  // namespace fastdoc

#endif  // FASTDOC_IO_HPP_
