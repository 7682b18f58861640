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

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace fastdoc {

namespace {

using nlohmann::json;

json parse_json(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw IoError("invalid JSON in " + path);
  return j;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& a, const std::string& what) {
  if (!a.is_array()) throw IoError(what + ": expected an array");
  Vector v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw IoError(what + ": expected numbers");
    v(static_cast<int>(i)) = a[i].get<double>();
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& a, const std::string& what) {
  if (!a.is_array()) throw IoError(what + ": expected a nested array");
  const int rows = static_cast<int>(a.size());
  if (rows == 0) return Matrix(0, 0);
  if (!a[0].is_array()) throw IoError(what + ": expected a nested array");
  const int cols = static_cast<int>(a[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = a[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw IoError(what + ": ragged rows");
    for (int c = 0; c < cols; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw IoError(what + ": expected numbers");
      m(r, c) = cell.get<double>();
    }
  }
  return m;
}

int int_field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw IoError(what + ": missing integer field \"" + key + "\"");
  return j[key].get<int>();
}

double number_field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j[key].is_number())
    throw IoError(what + ": missing numeric field \"" + key + "\"");
  return j[key].get<double>();
}

const json& required(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key))
    throw IoError(what + ": missing field \"" + key + "\"");
  return j[key];
}

json dims_to_json(int horizon, int nx, int nu, int ntheta) {
  return json{{"N", horizon}, {"nx", nx}, {"nu", nu}, {"ntheta", ntheta}};
}

// Formats a double with enough digits to round-trip exactly.
std::string full_precision(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Splits one CSV record, honoring double quotes with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& what) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw IoError(what + ": unterminated quote in CSV record");
  cells.push_back(std::move(cell));
  return cells;
}

std::string join_csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out.push_back(',');
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out.push_back('"');
      for (char ch : c) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
      }
      out.push_back('"');
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("error writing " + path);
}

void save_instance(const std::string& path, const InstanceFile& inst) {
  const DiffKktSystem& sys = inst.system;
  sys.validate();
  json blocks;
  blocks["H"] = json::array();
  for (const Matrix& h : sys.hessian.blocks) blocks["H"].push_back(matrix_to_json(h));
  blocks["A_diag"] = json::array();
  blocks["A_super"] = json::array();
  blocks["A_stage"] = json::array();
  for (const ConstraintRowBlock& r : sys.rows) {
    if (r.rows() == 0)
      throw IoError("save_instance: zero-row constraint blocks are not "
                    "representable in the instance file");
    blocks["A_diag"].push_back(matrix_to_json(r.on_stage));
    blocks["A_super"].push_back(r.has_next() ? matrix_to_json(r.on_next)
                                             : json::array());
    blocks["A_stage"].push_back(r.stage);
  }
  blocks["B"] = json::array();
  for (const Matrix& b : sys.param_cross) blocks["B"].push_back(matrix_to_json(b));
  blocks["C"] = json::array();
  for (const Matrix& c : sys.constraint_cross)
    blocks["C"].push_back(matrix_to_json(c));

  json j;
  j["dims"] = dims_to_json(inst.horizon, inst.state_dim, inst.control_dim,
                           sys.n_theta);
  j["blocks"] = std::move(blocks);
  write_file(path, j.dump(2) + "\n");
}

InstanceFile load_instance(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "instance file " + path;
  const json& dims = required(j, "dims", what);
  InstanceFile inst;
  inst.horizon = int_field(dims, "N", what);
  inst.state_dim = int_field(dims, "nx", what);
  inst.control_dim = int_field(dims, "nu", what);
  const int ntheta = int_field(dims, "ntheta", what);

  const json& blocks = required(j, "blocks", what);
  DiffKktSystem& sys = inst.system;
  sys.n_theta = ntheta;
  for (const json& h : required(blocks, "H", what))
    sys.hessian.blocks.push_back(matrix_from_json(h, what + ": H"));
  const json& diag = required(blocks, "A_diag", what);
  const json& super = required(blocks, "A_super", what);
  const json& stage = required(blocks, "A_stage", what);
  if (diag.size() != super.size() || diag.size() != stage.size())
    throw IoError(what + ": A_diag, A_super and A_stage lengths differ");
  for (std::size_t i = 0; i < diag.size(); ++i) {
    ConstraintRowBlock r;
    r.stage = stage[i].get<int>();
    r.on_stage = matrix_from_json(diag[i], what + ": A_diag");
    r.on_next = matrix_from_json(super[i], what + ": A_super");
    if (r.on_next.rows() == 0) r.on_next = Matrix(r.on_stage.rows(), 0);
    sys.rows.push_back(std::move(r));
  }
  for (const json& b : required(blocks, "B", what))
    sys.param_cross.push_back(matrix_from_json(b, what + ": B"));
  for (const json& c : required(blocks, "C", what))
    sys.constraint_cross.push_back(matrix_from_json(c, what + ": C"));
  sys.validate();
  return inst;
}

void save_solution(const std::string& path, const SolutionFile& sol) {
  json j;
  j["dims"] = dims_to_json(sol.horizon, sol.state_dim, sol.control_dim,
                           static_cast<int>(sol.theta.size()));
  j["theta"] = vector_to_json(sol.theta);
  j["x_init"] = vector_to_json(sol.x_init);
  j["xi"] = vector_to_json(sol.trajectory.xi);
  j["lambda"] = vector_to_json(sol.trajectory.lambda);
  json mask = json::array();
  for (const auto& stage : sol.trajectory.active_mask) {
    json row = json::array();
    for (bool b : stage) row.push_back(b ? 1 : 0);
    mask.push_back(std::move(row));
  }
  j["active_mask"] = std::move(mask);
  j["kkt_residual"] = sol.trajectory.kkt_residual;
  j["iterations"] = sol.trajectory.iterations;
  write_file(path, j.dump(2) + "\n");
}

SolutionFile load_solution(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "solution file " + path;
  const json& dims = required(j, "dims", what);
  SolutionFile sol;
  sol.horizon = int_field(dims, "N", what);
  sol.state_dim = int_field(dims, "nx", what);
  sol.control_dim = int_field(dims, "nu", what);
  sol.theta = vector_from_json(required(j, "theta", what), what + ": theta");
  sol.x_init = vector_from_json(required(j, "x_init", what), what + ": x_init");
  sol.trajectory.xi = vector_from_json(required(j, "xi", what), what + ": xi");
  sol.trajectory.lambda =
      vector_from_json(required(j, "lambda", what), what + ": lambda");
  for (const json& row : required(j, "active_mask", what)) {
    std::vector<bool> stage;
    for (const json& cell : row) stage.push_back(cell.get<int>() != 0);
    sol.trajectory.active_mask.push_back(std::move(stage));
  }
  if (j.contains("kkt_residual"))
    sol.trajectory.kkt_residual = j["kkt_residual"].get<double>();
  if (j.contains("iterations"))
    sol.trajectory.iterations = j["iterations"].get<int>();
  return sol;
}

BenchConfig load_bench_config(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "bench config " + path;
  if (!j.is_object()) throw IoError(what + ": expected an object");
  BenchConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "horizon_sweep") {
      cfg.horizon_sweep = value.get<std::vector<int>>();
    } else if (key == "state_sweep") {
      cfg.state_sweep = value.get<std::vector<int>>();
    } else if (key == "param_sweep") {
      cfg.param_sweep = value.get<std::vector<int>>();
    } else if (key == "base_horizon") {
      cfg.base_horizon = value.get<int>();
    } else if (key == "base_state_dim") {
      cfg.base_state_dim = value.get<int>();
    } else if (key == "base_param_dim") {
      cfg.base_param_dim = value.get<int>();
    } else if (key == "trials") {
      cfg.trials = value.get<int>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "solvers") {
      cfg.solvers = value.get<std::vector<std::string>>();
    } else if (key == "cond") {
      cfg.cond = value.get<double>();
    } else if (key == "dense_cap") {
      cfg.dense_cap = value.get<int>();
    } else {
      throw IoError(what + ": unknown field \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

void save_bench_config(const std::string& path, const BenchConfig& cfg) {
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
  write_file(path, j.dump(2) + "\n");
}

void save_demo(const std::string& path, const Demo& demo) {
  json j;
  j["scenario"] = scenario_name(demo.scenario);
  j["dt"] = demo.dt;
  j["horizon"] = demo.horizon;
  j["wheelbase"] = demo.wheelbase;
  j["states"] = json::array();
  for (const VehicleState& s : demo.states)
    j["states"].push_back(vector_to_json(s.to_vector()));
  j["controls"] = json::array();
  for (const Vector& u : demo.controls)
    j["controls"].push_back(vector_to_json(u));
  // Feature targets depend on the current (D, alpha) during training, so the
  // reference is stored as the raw per-sample data the targets derive from.
  j["tau_ref"] = json::array();
  for (const RefPoint& p : demo.reference.points) {
    Vector rec(kVehicleStateDim + 1);
    rec << p.state.to_vector(), p.u1;
    j["tau_ref"].push_back(vector_to_json(rec));
  }
  j["target_speed"] = demo.reference.target_speed;
  write_file(path, j.dump(2) + "\n");
}

Demo load_demo(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "demo file " + path;
  Demo demo;
  if (!j.contains("scenario") || !j["scenario"].is_string())
    throw IoError(what + ": missing string field \"scenario\"");
  demo.scenario = scenario_from_name(j["scenario"].get<std::string>());
  demo.dt = number_field(j, "dt", what);
  demo.horizon = int_field(j, "horizon", what);
  demo.wheelbase = number_field(j, "wheelbase", what);
  for (const json& s : required(j, "states", what)) {
    const Vector v = vector_from_json(s, what + ": states");
    demo.states.push_back(VehicleState::from_vector(v));
  }
  for (const json& u : required(j, "controls", what))
    demo.controls.push_back(vector_from_json(u, what + ": controls"));
  demo.reference.dt = demo.dt;
  for (const json& r : required(j, "tau_ref", what)) {
    const Vector rec = vector_from_json(r, what + ": tau_ref");
    if (rec.size() != kVehicleStateDim + 1)
      throw IoError(what + ": tau_ref records must have 8 entries");
    RefPoint p;
    p.state = VehicleState::from_vector(rec.head(kVehicleStateDim));
    p.u1 = rec(kVehicleStateDim);
    demo.reference.points.push_back(p);
  }
  demo.reference.target_speed =
      required(j, "target_speed", what).get<std::vector<double>>();
  if (demo.reference.target_speed.size() != demo.reference.points.size())
    throw IoError(what + ": target_speed length mismatch");
  if (demo.states.size() != demo.controls.size() + 1)
    throw IoError(what + ": states must have one more record than controls");
  return demo;
}

void save_params(const std::string& path, const PersonalizationParams& theta) {
  theta.validate();
  json j;
  j["w"] = vector_to_json(theta.w);
  j["D"] = theta.D;
  j["alpha"] = theta.alpha;
  write_file(path, j.dump(2) + "\n");
}

PersonalizationParams load_params(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "parameter file " + path;
  PersonalizationParams theta;
  theta.w = vector_from_json(required(j, "w", what), what + ": w");
  theta.D = number_field(j, "D", what);
  theta.alpha = number_field(j, "alpha", what);
  theta.validate();
  return theta;
}

void write_training_csv(const std::string& path, const TrainingLog& log) {
  std::string out = "iter,loss,build_ns,solve_ns,theta_json\n";
  for (const TrainingIteration& row : log.iterations) {
    std::vector<std::string> cells;
    cells.push_back(std::to_string(row.iter));
    cells.push_back(full_precision(row.loss));
    cells.push_back(std::to_string(row.build_ns));
    cells.push_back(std::to_string(row.solve_ns));
    if (row.has_theta) {
      json arr = vector_to_json(row.theta);
      cells.push_back(arr.dump());
    } else {
      cells.push_back("");
    }
    out += join_csv_line(cells) + "\n";
  }
  write_file(path, out);
}

TrainingLog parse_training_csv(const std::string& path) {
  const std::string what = "training log " + path;
  const std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.empty()) throw IoError(what + ": empty file");
  if (lines[0] != "iter,loss,build_ns,solve_ns,theta_json")
    throw IoError(what + ": unexpected header");
  TrainingLog log;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> cells = split_csv_line(lines[i], what);
    if (cells.size() != 5) throw IoError(what + ": ragged row");
    TrainingIteration row;
    row.iter = std::stoi(cells[0]);
    row.loss = std::stod(cells[1]);
    row.build_ns = std::stoll(cells[2]);
    row.solve_ns = std::stoll(cells[3]);
    if (!cells[4].empty()) {
      json arr = json::parse(cells[4], nullptr, false);
      if (arr.is_discarded() || !arr.is_array())
        throw IoError(what + ": invalid theta_json cell");
      row.theta = vector_from_json(arr, what + ": theta_json");
      row.has_theta = true;
    }
    log.iterations.push_back(std::move(row));
  }
  // final_theta is not part of the CSV; the caller recovers it from the
  // separate parameter file when needed.
  return log;
}

std::string compare_rule_name(CompareRule rule) {
  switch (rule) {
    case CompareRule::exact:
      return "exact";
    case CompareRule::strip_timing:
      return "strip_timing";
    case CompareRule::ignore:
      return "ignore";
  }
  throw IoError("unknown compare rule");
}

CompareRule compare_rule_from_name(const std::string& name) {
  if (name == "exact") return CompareRule::exact;
  if (name == "strip_timing") return CompareRule::strip_timing;
  if (name == "ignore") return CompareRule::ignore;
  throw IoError("unknown compare rule \"" + name + "\"");
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_path;
  j["seed"] = manifest.seed;
  j["input_hash"] = manifest.input_hash;
  j["out_dir"] = manifest.out_dir;
  j["timestamp"] = manifest.timestamp;
  json params = json::parse(manifest.parameters_json, nullptr, false);
  if (params.is_discarded())
    throw IoError("save_manifest: parameters_json is not valid JSON");
  j["parameters"] = std::move(params);
  j["outputs"] = json::array();
  for (const ManifestOutput& o : manifest.outputs)
    j["outputs"].push_back(
        json{{"file", o.file}, {"compare", compare_rule_name(o.compare)}});
  write_file(path, j.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  const json j = parse_json(path);
  const std::string what = "manifest " + path;
  RunManifest m;
  m.command = required(j, "command", what).get<std::string>();
  m.config_path = required(j, "config", what).get<std::string>();
  m.seed = required(j, "seed", what).get<std::uint64_t>();
  m.input_hash = required(j, "input_hash", what).get<std::string>();
  m.out_dir = required(j, "out_dir", what).get<std::string>();
  m.timestamp = required(j, "timestamp", what).get<std::string>();
  m.parameters_json = required(j, "parameters", what).dump();
  for (const json& o : required(j, "outputs", what)) {
    ManifestOutput out;
    out.file = required(o, "file", what).get<std::string>();
    out.compare =
        compare_rule_from_name(required(o, "compare", what).get<std::string>());
    m.outputs.push_back(std::move(out));
  }
  return m;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string input_content_hash(const std::string& command,
                               const std::string& parameters_json,
                               const std::vector<std::string>& input_files) {
  std::string bytes = command;
  bytes.push_back('\0');
  bytes += parameters_json;
  for (const std::string& f : input_files) {
    bytes.push_back('\0');
    bytes += read_file(f);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, fnv1a64(bytes));
  return buf;
}

std::string strip_timing_columns(const std::string& csv_text) {
  const std::vector<std::string> lines = split_lines(csv_text);
  if (lines.empty()) throw IoError("strip_timing_columns: empty CSV");
  const std::vector<std::string> header =
      split_csv_line(lines[0], "strip_timing_columns");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const bool timing =
        name.size() > 3 && name.compare(name.size() - 3, 3, "_ns") == 0;
    if (!timing) keep.push_back(i);
  }
  std::string out;
  for (const std::string& line : lines) {
    if (line.empty()) continue;
    const std::vector<std::string> cells =
        split_csv_line(line, "strip_timing_columns");
    if (cells.size() != header.size())
      throw IoError("strip_timing_columns: ragged CSV row");
    std::vector<std::string> kept;
    kept.reserve(keep.size());
    for (std::size_t i : keep) kept.push_back(cells[i]);
    out += join_csv_line(kept) + "\n";
  }
  return out;
}

}  // namespace fastdoc
