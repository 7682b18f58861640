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
#include "fastdoc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "fastdoc/deriv.hpp"
#include "fastdoc/rng.hpp"

namespace fastdoc {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SweepPointSpec {
  std::string sweep;
  std::uint64_t sweep_id;
  int value;
  int horizon;
  int state_dim;
  int param_dim;
};

struct RunOutput {
  bool ok = false;
  TrajectoryDerivatives der;
  std::string error;
  std::int64_t build_ns = -1;
  std::int64_t total_ns = -1;
};

// One full solver run: Build (materializing the instance into the solver's
// input layout) followed by the solve. Errors are captured, not thrown.
RunOutput run_one(const std::string& solver, const DiffKktSystem& sys) {
  RunOutput out;
  try {
    if (solver == "dense") {
      const auto t0 = Clock::now();
      const DenseKkt dk = assemble_dense_kkt(sys);
      const auto t1 = Clock::now();
      out.der = dense_backward(dk);
      const auto t2 = Clock::now();
      out.build_ns = elapsed_ns(t0, t1);
      out.total_ns = elapsed_ns(t0, t2);
    } else {
      const auto t0 = Clock::now();
      DiffKktSystem local = sys;
      local.validate();
      const auto t1 = Clock::now();
      out.der = solver == "fastdoc" ? fastdoc_backward(local)
                                    : blocklu_backward(local);
      const auto t2 = Clock::now();
      out.build_ns = elapsed_ns(t0, t1);
      out.total_ns = elapsed_ns(t0, t2);
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

double output_error(const TrajectoryDerivatives& a, const TrajectoryDerivatives& b) {
  return std::max(rel_inf_error(a.dxi_dtheta, b.dxi_dtheta),
                  rel_inf_error(a.dlambda_dtheta, b.dlambda_dtheta));
}

double geometric_mean(const std::vector<double>& ratios) {
  if (ratios.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double r : ratios) s += std::log(r);
  return std::exp(s / static_cast<double>(ratios.size()));
}

}  // namespace

int bench_control_dim(int state_dim) { return std::max(1, (state_dim + 3) / 4); }

void BenchConfig::validate() const {
  if (base_horizon < 1 || base_state_dim < 1 || base_param_dim < 1)
    throw DimensionMismatch("BenchConfig: base dimensions must be positive");
  if (trials < 1) throw DimensionMismatch("BenchConfig: trials must be positive");
  if (!(cond >= 1.0)) throw DimensionMismatch("BenchConfig: cond must be >= 1");
  if (dense_cap < 1) throw DimensionMismatch("BenchConfig: dense_cap must be positive");
  auto check_list = [](const std::vector<int>& v, const char* name) {
    for (int x : v)
      if (x < 1)
        throw DimensionMismatch(std::string("BenchConfig: nonpositive value in ") +
                                name);
  };
  check_list(horizon_sweep, "horizon_sweep");
  check_list(state_sweep, "state_sweep");
  check_list(param_sweep, "param_sweep");
  if (solvers.empty())
    throw DimensionMismatch("BenchConfig: at least one solver required");
  for (const std::string& s : solvers)
    if (s != "fastdoc" && s != "blocklu" && s != "dense")
      throw DimensionMismatch("BenchConfig: unknown solver " + s);
}

std::vector<BenchRecord> run_sweep(const BenchConfig& cfg,
                                   const std::string& csv_path) {
  cfg.validate();

  std::vector<SweepPointSpec> points;
  for (int v : cfg.horizon_sweep)
    points.push_back({"horizon", 1, v, v, cfg.base_state_dim, cfg.base_param_dim});
  for (int v : cfg.state_sweep)
    points.push_back({"state", 2, v, cfg.base_horizon, v, cfg.base_param_dim});
  for (int v : cfg.param_sweep)
    points.push_back({"param", 3, v, cfg.base_horizon, cfg.base_state_dim, v});

  const bool dense_enabled =
      std::find(cfg.solvers.begin(), cfg.solvers.end(), "dense") !=
      cfg.solvers.end();

  std::vector<BenchRecord> records;
  for (const SweepPointSpec& pt : points) {
    const int m = bench_control_dim(pt.state_dim);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t inst_seed =
          Rng::child_seed(cfg.seed, pt.sweep_id,
                          static_cast<std::uint64_t>(pt.value),
                          static_cast<std::uint64_t>(trial));
      const DiffKktSystem sys = gen_synthetic(pt.horizon, pt.state_dim, m,
                                              pt.param_dim, cfg.cond, inst_seed);
      const int saddle = sys.total_primal() + sys.total_constraint_rows();
      const bool dense_runs = dense_enabled && saddle <= cfg.dense_cap;

      std::map<std::string, RunOutput> outputs;
      for (const std::string& solver : cfg.solvers) {
        BenchRecord rec;
        rec.sweep = pt.sweep;
        rec.varied_value = static_cast<double>(pt.value);
        rec.solver = solver;
        rec.trial = trial;
        if (solver == "dense" && !dense_runs) {
          records.push_back(std::move(rec));  // recorded as not-run
          continue;
        }
        if (trial == 0) run_one(solver, sys);  // untimed warm-up per point
        RunOutput out = run_one(solver, sys);
        if (out.ok) {
          rec.build_ns = out.build_ns;
          rec.total_ns = out.total_ns;
          if (solver != "dense") {
            rec.step1_ns = out.der.breakdown.step1_ns;
            rec.step2_ns = out.der.breakdown.step2_ns;
            rec.step3_ns = out.der.breakdown.step3_ns;
            rec.step4_ns = out.der.breakdown.step4_ns;
          }
        } else {
          rec.error = out.error;
        }
        outputs[solver] = std::move(out);
        records.push_back(std::move(rec));
      }

      // Error column versus the dense oracle, for every solver that ran.
      auto dense_it = outputs.find("dense");
      if (dense_it != outputs.end() && dense_it->second.ok) {
        for (auto it = records.end() - static_cast<long>(cfg.solvers.size());
             it != records.end(); ++it) {
          if (it->trial != trial) continue;  // dense row skipped above
          auto self = outputs.find(it->solver);
          if (self == outputs.end() || !self->second.ok) continue;
          it->rel_err = it->solver == "dense"
                            ? 0.0
                            : output_error(self->second.der, dense_it->second.der);
        }
      }
    }
  }

  if (!csv_path.empty()) write_bench_csv(records, csv_path);
  return records;
}

void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_bench_csv: cannot open " + path);
  out << "sweep,varied_value,solver,trial,build_ns,step1_ns,step2_ns,step3_ns,"
         "step4_ns,total_ns,rel_err\n";
  auto ns_cell = [](std::int64_t v) {
    return v < 0 ? std::string() : std::to_string(v);
  };
  for (const BenchRecord& r : records) {
    out << r.sweep << ',' << g17(r.varied_value) << ',' << r.solver << ','
        << r.trial << ',' << ns_cell(r.build_ns) << ',' << ns_cell(r.step1_ns)
        << ',' << ns_cell(r.step2_ns) << ',' << ns_cell(r.step3_ns) << ','
        << ns_cell(r.step4_ns) << ',' << ns_cell(r.total_ns) << ','
        << (std::isnan(r.rel_err) ? std::string() : g17(r.rel_err)) << '\n';
  }
  if (!out) throw Error("write_bench_csv: write failed for " + path);
}

std::vector<BenchRecord> parse_bench_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse_bench_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "sweep,varied_value,solver,trial,build_ns,step1_ns,step2_ns,"
              "step3_ns,step4_ns,total_ns,rel_err")
    throw Error("parse_bench_csv: unexpected header in " + path);

  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 11)
      throw Error("parse_bench_csv: malformed row in " + path);
    BenchRecord r;
    r.sweep = cells[0];
    r.varied_value = std::strtod(cells[1].c_str(), nullptr);
    r.solver = cells[2];
    r.trial = std::atoi(cells[3].c_str());
    auto ns_val = [](const std::string& s) {
      return s.empty() ? std::int64_t{-1}
                       : static_cast<std::int64_t>(std::strtoll(s.c_str(), nullptr, 10));
    };
    r.build_ns = ns_val(cells[4]);
    r.step1_ns = ns_val(cells[5]);
    r.step2_ns = ns_val(cells[6]);
    r.step3_ns = ns_val(cells[7]);
    r.step4_ns = ns_val(cells[8]);
    r.total_ns = ns_val(cells[9]);
    r.rel_err = cells[10].empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : std::strtod(cells[10].c_str(), nullptr);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<SpeedupPoint> speedup_summary(const std::vector<BenchRecord>& records) {
  // Group rows by (sweep, value), preserving first-appearance order.
  struct PointRows {
    std::map<int, const BenchRecord*> fastdoc, blocklu, dense;
  };
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, PointRows> groups;
  bool any_fastdoc = false;
  for (const BenchRecord& r : records) {
    const std::pair<std::string, double> key{r.sweep, r.varied_value};
    auto it = groups.find(key);
    if (it == groups.end()) {
      order.push_back(key);
      it = groups.emplace(key, PointRows{}).first;
    }
    if (r.solver == "fastdoc") {
      it->second.fastdoc[r.trial] = &r;
      any_fastdoc = true;
    } else if (r.solver == "blocklu") {
      it->second.blocklu[r.trial] = &r;
    } else if (r.solver == "dense") {
      it->second.dense[r.trial] = &r;
    }
  }
  if (!any_fastdoc)
    throw MissingPair("speedup_summary: no fastdoc rows in the record set");

  std::vector<SpeedupPoint> out;
  int total_pairs = 0;
  for (const auto& key : order) {
    const PointRows& rows = groups.at(key);
    SpeedupPoint sp;
    sp.sweep = key.first;
    sp.varied_value = key.second;
    std::vector<double> total_lu, factor_lu, total_dense;
    for (const auto& [trial, fd] : rows.fastdoc) {
      if (fd->total_ns < 0) continue;
      auto lu = rows.blocklu.find(trial);
      if (lu != rows.blocklu.end() && lu->second->total_ns >= 0) {
        total_lu.push_back(static_cast<double>(lu->second->total_ns) /
                           static_cast<double>(fd->total_ns));
        const std::int64_t fd_factor = fd->step1_ns + fd->step3_ns;
        const std::int64_t lu_factor =
            lu->second->step1_ns + lu->second->step3_ns;
        if (fd->step1_ns >= 0 && fd->step3_ns >= 0 && fd_factor > 0 &&
            lu->second->step1_ns >= 0 && lu->second->step3_ns >= 0)
          factor_lu.push_back(static_cast<double>(lu_factor) /
                              static_cast<double>(fd_factor));
      }
      auto de = rows.dense.find(trial);
      if (de != rows.dense.end() && de->second->total_ns >= 0)
        total_dense.push_back(static_cast<double>(de->second->total_ns) /
                              static_cast<double>(fd->total_ns));
    }
    sp.pairs_blocklu = static_cast<int>(total_lu.size());
    sp.pairs_dense = static_cast<int>(total_dense.size());
    sp.total_vs_blocklu = geometric_mean(total_lu);
    sp.factor_vs_blocklu = geometric_mean(factor_lu);
    sp.total_vs_dense = geometric_mean(total_dense);
    total_pairs += sp.pairs_blocklu + sp.pairs_dense;
    out.push_back(std::move(sp));
  }
  if (total_pairs == 0)
    throw MissingPair("speedup_summary: no comparator rows pair with fastdoc");
  return out;
}

}  // namespace fastdoc
