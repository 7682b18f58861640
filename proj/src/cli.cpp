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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "fastdoc/deriv.hpp"
#include "fastdoc/io.hpp"
#include "fastdoc/kkt_assembly.hpp"
#include "fastdoc/rng.hpp"
#include "fastdoc/sqp.hpp"
#include "fastdoc/synthetic.hpp"
#include "fastdoc/vehicle.hpp"
#include "json.hpp"

namespace fastdoc {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string joined(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

RunManifest start_manifest(const std::string& command,
                           const std::string& config_path, std::uint64_t seed,
                           const json& params,
                           const std::vector<std::string>& input_files,
                           const std::string& out_dir) {
  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.seed = seed;
  m.out_dir = out_dir;
  m.timestamp = utc_timestamp();
  m.parameters_json = params.dump();
  m.input_hash = input_content_hash(command, m.parameters_json, input_files);
  return m;
}

json bench_config_json(const BenchConfig& cfg) {
  json j;
  j["horizon_sweep"] = cfg.horizon_sweep;
  j["state_sweep"] = cfg.state_sweep;
  j["param_sweep"] = cfg.param_sweep;
  j["base_horizon"] = cfg.base_horizon;
  j["base_state_dim"] = cfg.base_state_dim;
  j["base_param_dim"] = cfg.base_param_dim;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["solvers"] = cfg.solvers;
  j["cond"] = cfg.cond;
  j["dense_cap"] = cfg.dense_cap;
  return j;
}

void print_speedups(const std::vector<SpeedupPoint>& points) {
  for (const SpeedupPoint& p : points) {
    std::ostringstream os;
    os << "  " << p.sweep << " = " << p.varied_value << ":";
    if (std::isfinite(p.total_vs_blocklu))
      os << " vs blocklu x" << p.total_vs_blocklu << " total, x"
         << p.factor_vs_blocklu << " factorization (" << p.pairs_blocklu
         << " pairs)";
    if (std::isfinite(p.total_vs_dense))
      os << " vs dense x" << p.total_vs_dense << " (" << p.pairs_dense
         << " pairs)";
    if (!std::isfinite(p.total_vs_blocklu) && !std::isfinite(p.total_vs_dense))
      os << " no comparator";
    std::cout << os.str() << "\n";
  }
}

// ---------------------------------------------------------------- verify --

struct VerifyOutcome {
  int synthetic_checked = 0;
  int smooth_checked = 0;
  double max_err_dense = 0.0;
  double max_err_fd = 0.0;
  std::vector<std::pair<std::uint64_t, std::string>> failures;
};

// Deterministic dimension draw for one verification instance. Three classes
// keep the extremes covered (long horizons, wide states, mixed), and the
// saddle dimension is capped so the dense oracle stays affordable.
struct VerifyDims {
  int horizon, state, control, param;
};

VerifyDims draw_verify_dims(Rng& rng, int max_horizon, int max_state,
                            int max_param) {
  const int cls = static_cast<int>(rng.uniform_int(0, 2));
  int horizon, state;
  if (cls == 0) {
    horizon = static_cast<int>(
        rng.uniform_int(std::max(3, max_horizon / 4), max_horizon));
    state = static_cast<int>(rng.uniform_int(2, std::max(2, max_state / 8)));
  } else if (cls == 1) {
    horizon = static_cast<int>(rng.uniform_int(3, std::max(3, max_horizon / 20)));
    state = static_cast<int>(
        rng.uniform_int(std::max(2, max_state / 4), max_state));
  } else {
    horizon = static_cast<int>(
        rng.uniform_int(3, std::max(3, 3 * max_horizon / 10)));
    state = static_cast<int>(rng.uniform_int(2, std::max(2, 3 * max_state / 8)));
  }
  const int param = static_cast<int>(rng.uniform_int(1, std::max(1, max_param)));

  auto saddle_dim = [](int N, int n) {
    const int m = bench_control_dim(n);
    const int sc = synthetic_stage_constraint_rows(n, m);
    const int primal = N * (n + m) + n;
    const int rows = n + N * (sc + n) + sc;
    return primal + rows;
  };
  // Budget cap keeps the dense LU under control; halve the horizon first
  // (structure is preserved), then the state dimension.
  while (saddle_dim(horizon, state) > 2500) {
    if (horizon > 3) {
      horizon = std::max(3, horizon / 2);
    } else if (state > 2) {
      state = std::max(2, state / 2);
    } else {
      break;
    }
  }
  return {horizon, state, bench_control_dim(state), param};
}

VerifyOutcome run_verification(const VerifyCommand& cmd, double thr_dense,
                               double thr_fd) {
  VerifyOutcome out;
  for (int i = 0; i < cmd.instances; ++i) {
    const std::uint64_t seed = Rng::child_seed(cmd.seed, 0x5eedf00d, i);
    Rng rng(seed);
    const VerifyDims d =
        draw_verify_dims(rng, cmd.max_horizon, cmd.max_state, cmd.max_param);
    const DiffKktSystem sys =
        gen_synthetic(d.horizon, d.state, d.control, d.param, 1e3, seed);
    const TrajectoryDerivatives fast = fastdoc_backward(sys);
    const TrajectoryDerivatives dense = dense_backward(sys);
    const double err =
        std::max(rel_inf_error(fast.dxi_dtheta, dense.dxi_dtheta),
                 rel_inf_error(fast.dlambda_dtheta, dense.dlambda_dtheta));
    out.max_err_dense = std::max(out.max_err_dense, err);
    ++out.synthetic_checked;
    if (!(err < thr_dense)) {
      std::ostringstream os;
      os << "dense check: rel err " << err << " at N=" << d.horizon
         << " n=" << d.state << " d=" << d.param;
      out.failures.emplace_back(seed, os.str());
    }
  }

  const int smooth = cmd.instances / 5;
  for (int i = 0; i < smooth; ++i) {
    const std::uint64_t seed = Rng::child_seed(cmd.seed, 0x57007e5, i);
    Rng rng(seed);
    const int nx = static_cast<int>(rng.uniform_int(1, 4));
    const int nu = static_cast<int>(rng.uniform_int(1, 2));
    const int horizon = static_cast<int>(rng.uniform_int(2, 8));
    const int ntheta = static_cast<int>(rng.uniform_int(1, 4));
    const SmoothOcpInstance inst =
        smooth_ocp_instance(nx, nu, horizon, ntheta, seed);
    SqpSettings settings;
    settings.kkt_tolerance = 1e-11;
    const SolvedTrajectory traj =
        solve_ocp(inst.ocp, inst.theta_ref, inst.x_init, settings);
    const DiffKktSystem sys =
        assemble_dkkt(inst.ocp, inst.theta_ref, traj, HessianMode::gauss_newton);
    const Matrix dxi = fastdoc_backward(sys).dxi_dtheta;
    const Matrix fd =
        fd_sensitivity_oracle(inst.ocp, inst.theta_ref, inst.x_init, 1e-5,
                              settings);
    const double err = rel_inf_error(fd, dxi);
    out.max_err_fd = std::max(out.max_err_fd, err);
    ++out.smooth_checked;
    if (!(err < thr_fd)) {
      std::ostringstream os;
      os << "finite-difference check: rel err " << err << " at nx=" << nx
         << " N=" << horizon;
      out.failures.emplace_back(seed, os.str());
    }
  }
  return out;
}

// ----------------------------------------------------------------- replay --

bool compare_output(const std::string& old_path, const std::string& new_path,
                    CompareRule rule, std::string* detail) {
  const std::string a = read_file(old_path);
  const std::string b = read_file(new_path);
  if (rule == CompareRule::exact) {
    if (a == b) return true;
    *detail = "contents differ";
    return false;
  }
  const std::string sa = strip_timing_columns(a);
  const std::string sb = strip_timing_columns(b);
  if (sa == sb) return true;
  *detail = "non-timing columns differ";
  return false;
}

int rerun_from_manifest(const RunManifest& m, const std::string& out_dir,
                        bool quiet) {
  const json p = json::parse(m.parameters_json);
  if (m.command == "bench") {
    BenchCommand cmd;
    cmd.config_path = p.value("config", std::string());
    cmd.solvers = p.value("solvers", std::vector<std::string>());
    if (p.contains("seed_override"))
      cmd.seed = p["seed_override"].get<std::uint64_t>();
    cmd.out_dir = out_dir;
    cmd.quiet = quiet;
    return cmd_bench(cmd);
  }
  if (m.command == "verify") {
    VerifyCommand cmd;
    cmd.instances = p.at("instances").get<int>();
    cmd.seed = p.at("seed").get<std::uint64_t>();
    cmd.max_horizon = p.at("max_horizon").get<int>();
    cmd.max_state = p.at("max_state").get<int>();
    cmd.max_param = p.at("max_param").get<int>();
    cmd.force_threshold = p.at("force_threshold").get<double>();
    cmd.out_dir = out_dir;
    cmd.quiet = quiet;
    return cmd_verify(cmd);
  }
  if (m.command == "demo") {
    DemoCommand cmd;
    cmd.scenario = p.at("scenario").get<std::string>();
    cmd.gen_demo = p.at("mode").get<std::string>() == "gen";
    cmd.train_path = p.value("train", std::string());
    cmd.theta_star_path = p.value("theta_star", std::string());
    cmd.noise = p.at("noise").get<double>();
    cmd.seed = p.at("seed").get<std::uint64_t>();
    cmd.out_dir = out_dir;
    cmd.quiet = quiet;
    return cmd_demo(cmd);
  }
  throw IoError("replay: unknown command \"" + m.command + "\"");
}

}  // namespace

int cmd_bench(const BenchCommand& cmd) {
  BenchConfig cfg;
  std::vector<std::string> inputs;
  try {
    if (!cmd.config_path.empty()) {
      cfg = load_bench_config(cmd.config_path);
      inputs.push_back(cmd.config_path);
    }
    if (!cmd.solvers.empty()) cfg.solvers = cmd.solvers;
    if (cmd.seed) cfg.seed = *cmd.seed;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return kExitConfig;
  }

  json params;
  params["config"] = cmd.config_path;
  if (!cmd.solvers.empty()) params["solvers"] = cmd.solvers;
  if (cmd.seed) params["seed_override"] = *cmd.seed;
  params["effective_config"] = bench_config_json(cfg);

  try {
    RunManifest manifest = start_manifest("bench", cmd.config_path, cfg.seed,
                                          params, inputs, cmd.out_dir);
    if (!cmd.out_dir.empty())
      std::filesystem::create_directories(cmd.out_dir);
    const std::string csv_path = joined(cmd.out_dir, "results.csv");
    const std::vector<BenchRecord> records = run_sweep(cfg, csv_path);

    json summary = json::array();
    const bool has_fastdoc =
        std::find(cfg.solvers.begin(), cfg.solvers.end(), "fastdoc") !=
        cfg.solvers.end();
    std::vector<SpeedupPoint> points;
    if (has_fastdoc) points = speedup_summary(records);
    for (const SpeedupPoint& p : points) {
      json row;
      row["sweep"] = p.sweep;
      row["varied_value"] = p.varied_value;
      row["pairs_blocklu"] = p.pairs_blocklu;
      row["pairs_dense"] = p.pairs_dense;
      row["total_vs_blocklu"] = p.total_vs_blocklu;
      row["factor_vs_blocklu"] = p.factor_vs_blocklu;
      row["total_vs_dense"] = p.total_vs_dense;
      summary.push_back(std::move(row));
    }
    write_file(joined(cmd.out_dir, "summary.json"), summary.dump(2) + "\n");

    manifest.outputs.push_back({"results.csv", CompareRule::strip_timing});
    manifest.outputs.push_back({"summary.json", CompareRule::ignore});
    save_manifest(joined(cmd.out_dir, "manifest.json"), manifest);

    int errored = 0;
    for (const BenchRecord& r : records)
      if (!r.error.empty()) ++errored;
    if (!cmd.quiet) {
      std::cout << "bench: " << records.size() << " rows -> " << csv_path
                << "\n";
      print_speedups(points);
      if (errored > 0) std::cout << "bench: " << errored << " trial(s) errored\n";
    }
    return errored > 0 ? kExitPartial : kExitOk;
  } catch (const Error& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_verify(const VerifyCommand& cmd) {
  if (cmd.instances < 0 || cmd.max_horizon < 3 || cmd.max_state < 2 ||
      cmd.max_param < 1) {
    std::cerr << "verify: invalid limits\n";
    return kExitConfig;
  }
  const double thr_dense = cmd.force_threshold >= 0.0 ? cmd.force_threshold : 1e-6;
  const double thr_fd = cmd.force_threshold >= 0.0 ? cmd.force_threshold : 1e-4;

  json params;
  params["instances"] = cmd.instances;
  params["seed"] = cmd.seed;
  params["max_horizon"] = cmd.max_horizon;
  params["max_state"] = cmd.max_state;
  params["max_param"] = cmd.max_param;
  params["force_threshold"] = cmd.force_threshold;

  try {
    RunManifest manifest =
        start_manifest("verify", "", cmd.seed, params, {}, cmd.out_dir);
    const VerifyOutcome out = run_verification(cmd, thr_dense, thr_fd);

    json report;
    report["synthetic_instances"] = out.synthetic_checked;
    report["smooth_instances"] = out.smooth_checked;
    report["max_rel_err_dense"] = out.max_err_dense;
    report["max_rel_err_fd"] = out.max_err_fd;
    report["threshold_dense"] = thr_dense;
    report["threshold_fd"] = thr_fd;
    json fails = json::array();
    for (const auto& [seed, what] : out.failures)
      fails.push_back(json{{"seed", seed}, {"what", what}});
    report["failures"] = std::move(fails);
    write_file(joined(cmd.out_dir, "verify_report.json"), report.dump(2) + "\n");

    manifest.outputs.push_back({"verify_report.json", CompareRule::exact});
    save_manifest(joined(cmd.out_dir, "manifest.json"), manifest);

    if (!cmd.quiet) {
      std::cout << "verify: " << out.synthetic_checked
                << " synthetic instances, max rel err vs dense "
                << out.max_err_dense << " (threshold " << thr_dense << ")\n";
      std::cout << "verify: " << out.smooth_checked
                << " smooth instances, max rel err vs finite differences "
                << out.max_err_fd << " (threshold " << thr_fd << ")\n";
    }
    if (!out.failures.empty()) {
      std::cerr << "verify: " << out.failures.size() << " failure(s):\n";
      for (const auto& [seed, what] : out.failures)
        std::cerr << "  seed " << seed << ": " << what << "\n";
      return kExitVerify;
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_demo(const DemoCommand& cmd) {
  if (cmd.gen_demo == !cmd.train_path.empty()) {
    std::cerr << "demo: pass exactly one of --gen-demo or --train <file>\n";
    return kExitConfig;
  }

  json params;
  params["mode"] = cmd.gen_demo ? "gen" : "train";
  params["scenario"] = cmd.scenario;
  params["noise"] = cmd.noise;
  params["seed"] = cmd.seed;
  if (!cmd.theta_star_path.empty()) params["theta_star"] = cmd.theta_star_path;
  if (!cmd.train_path.empty()) params["train"] = cmd.train_path;

  if (cmd.gen_demo) {
    try {
      const Scenario scenario = scenario_from_name(cmd.scenario);
      PersonalizationParams theta_star = demo_driver_params();
      std::vector<std::string> inputs;
      if (!cmd.theta_star_path.empty()) {
        theta_star = load_params(cmd.theta_star_path);
        inputs.push_back(cmd.theta_star_path);
      }
      RunManifest manifest = start_manifest("demo", cmd.theta_star_path,
                                            cmd.seed, params, inputs,
                                            cmd.out_dir);
      const Demo demo = generate_demo(theta_star, scenario, cmd.noise, cmd.seed);
      save_demo(joined(cmd.out_dir, "demo.json"), demo);
      manifest.outputs.push_back({"demo.json", CompareRule::exact});
      save_manifest(joined(cmd.out_dir, "manifest.json"), manifest);
      if (!cmd.quiet)
        std::cout << "demo: wrote " << joined(cmd.out_dir, "demo.json") << " ("
                  << demo.steps() << " steps, " << scenario_name(scenario)
                  << ")\n";
      return kExitOk;
    } catch (const Error& e) {
      std::cerr << "demo: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  // Training. The demonstration file's scenario picks the training defaults.
  Demo demo;
  RunManifest manifest;
  try {
    demo = load_demo(cmd.train_path);
    manifest = start_manifest("demo", cmd.train_path, cmd.seed, params,
                              {cmd.train_path}, cmd.out_dir);
  } catch (const Error& e) {
    std::cerr << "demo: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const TrainingConfig cfg = TrainingConfig::defaults(demo.scenario);
    const TrainingLog log = train(cfg, demo, PersonalizationParams::initial());
    write_training_csv(joined(cmd.out_dir, "training_log.csv"), log);
    save_params(joined(cmd.out_dir, "theta_final.json"), log.final_theta);
    manifest.outputs.push_back({"training_log.csv", CompareRule::strip_timing});
    manifest.outputs.push_back({"theta_final.json", CompareRule::exact});
    save_manifest(joined(cmd.out_dir, "manifest.json"), manifest);
    if (!cmd.quiet && !log.iterations.empty()) {
      const double first = log.iterations.front().loss;
      const double last = log.iterations.back().loss;
      std::cout << "demo: trained " << log.iterations.size()
                << " iterations, loss " << first << " -> " << last;
      if (first > 0.0) std::cout << " (ratio " << last / first << ")";
      std::cout << "\n";
    }
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << "demo: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "demo: training aborted: " << e.what() << "\n";
    return kExitPartial;
  }
}

int cmd_replay(const ReplayCommand& cmd) {
  RunManifest m;
  try {
    m = load_manifest(cmd.manifest_path);
    // Guard against silently replaying against edited inputs.
    std::vector<std::string> inputs;
    if (m.command == "bench" && !m.config_path.empty())
      inputs.push_back(m.config_path);
    if (m.command == "demo" && !m.config_path.empty())
      inputs.push_back(m.config_path);
    const std::string hash =
        input_content_hash(m.command, m.parameters_json, inputs);
    if (hash != m.input_hash) {
      std::cerr << "replay: input files changed since the manifest was "
                   "written (hash "
                << hash << " != " << m.input_hash << ")\n";
      return kExitConfig;
    }
  } catch (const Error& e) {
    std::cerr << "replay: " << e.what() << "\n";
    return kExitConfig;
  }

  const std::string out_dir =
      cmd.out_dir.empty() ? m.out_dir + "_replay" : cmd.out_dir;
  int rc;
  try {
    rc = rerun_from_manifest(m, out_dir, cmd.quiet);
  } catch (const Error& e) {
    std::cerr << "replay: " << e.what() << "\n";
    return kExitConfig;
  }
  if (rc == kExitConfig) return kExitConfig;

  bool all_ok = true;
  try {
    for (const ManifestOutput& o : m.outputs) {
      if (o.compare == CompareRule::ignore) continue;
      std::string detail;
      const bool ok = compare_output(joined(m.out_dir, o.file),
                                     joined(out_dir, o.file), o.compare,
                                     &detail);
      if (!cmd.quiet || !ok)
        std::cout << "replay: " << o.file << " " << (ok ? "OK" : "MISMATCH")
                  << (ok ? "" : " (" + detail + ")") << "\n";
      all_ok = all_ok && ok;
    }
  } catch (const Error& e) {
    std::cerr << "replay: " << e.what() << "\n";
    return kExitConfig;
  }
  return all_ok ? kExitOk : kExitVerify;
}

}  // namespace fastdoc
