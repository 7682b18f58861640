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
#include "fastdoc/vehicle.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "fastdoc/deriv.hpp"
#include "fastdoc/rng.hpp"

namespace fastdoc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedMax = 30.0 / 3.6;   // 30 km/h
constexpr double kAccelMax = 2.0;
constexpr double kJerkMax = 4.0;
constexpr double kSteerMax = kPi / 6.0;
constexpr double kSteerRateMax = 1.5;

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
}

void check_steering(double delta) {
  if (!(std::abs(delta) < kPi / 2.0 - 1e-6))
    throw SteeringSingularity("vehicle_step: |delta| too close to pi/2");
}

// Feature vector and its derivatives at one stage. For the terminal stage
// (with_control = false) the u1 slot is dropped, leaving 7 rows against the
// 7 state columns.
struct FeatureEval {
  Vector tau;
  Matrix jac;   // d tau / d (x[,u])
  Vector d_D;
  Vector d_alpha;
};

FeatureEval eval_features(const VehicleState& x, double u1, double D,
                          double alpha, bool with_control) {
  const int rows = with_control ? 8 : 7;
  const int cols = with_control ? 9 : 7;
  FeatureEval f;
  f.tau.resize(rows);
  f.jac = Matrix::Zero(rows, cols);
  f.d_D = Vector::Zero(rows);
  f.d_alpha = Vector::Zero(rows);

  const double heading = x.phi + alpha * x.delta;
  const double c = std::cos(heading);
  const double s = std::sin(heading);

  f.tau(0) = x.X + D * c;
  f.jac(0, 0) = 1.0;
  f.jac(0, 2) = -D * s;
  f.jac(0, 5) = -D * s * alpha;
  f.d_D(0) = c;
  f.d_alpha(0) = -D * s * x.delta;

  f.tau(1) = x.Y + D * s;
  f.jac(1, 1) = 1.0;
  f.jac(1, 2) = D * c;
  f.jac(1, 5) = D * c * alpha;
  f.d_D(1) = s;
  f.d_alpha(1) = D * c * x.delta;

  f.tau(2) = x.phi;
  f.jac(2, 2) = 1.0;
  f.tau(3) = x.v;
  f.jac(3, 3) = 1.0;
  f.tau(4) = x.delta;
  f.jac(4, 5) = 1.0;
  f.tau(5) = x.a;
  f.jac(5, 4) = 1.0;
  if (with_control) {
    f.tau(6) = u1;
    f.jac(6, 7) = 1.0;
    f.tau(7) = x.delta_rate;
    f.jac(7, 6) = 1.0;
  } else {
    f.tau(6) = x.delta_rate;
    f.jac(6, 6) = 1.0;
  }
  return f;
}

// Feature targets for one reference point. Tracking rows (look-ahead point,
// heading, speed) follow the reference; comfort rows (delta, a, u1,
// delta_rate) are referenced to zero, so tracking accuracy and driving
// comfort compete and the optimal trajectory moves with the weight ratios.
FeatureEval reference_targets(const RefPoint& rp, double D, double alpha,
                              bool with_control) {
  FeatureEval f = eval_features(rp.state, rp.u1, D, alpha, with_control);
  for (int i = 4; i < f.tau.size(); ++i) f.tau(i) = 0.0;
  return f;
}

// Weights aligned with eval_features rows: all eight on a stage, u1's weight
// dropped at the terminal.
Vector aligned_weights(const Vector& w, bool with_control) {
  if (with_control) return w;
  Vector t(7);
  t << w(0), w(1), w(2), w(3), w(4), w(5), w(7);
  return t;
}

void check_weights(const Vector& w) {
  if (w.size() != 8) throw DimensionMismatch("vehicle: weight vector must have 8 entries");
  for (int i = 0; i < w.size(); ++i)
    if (!(w(i) >= 0.0))
      throw NegativeWeight("vehicle: negative feature weight w[" +
                           std::to_string(i) + "]");
}

VehicleState state_from_xi(const Vector& xi) {
  return VehicleState::from_vector(xi.head(kVehicleStateDim));
}

// Box constraints g(xi) <= 0. Stage 0 keeps only the control rows (the
// initial-condition rows already pin the state and duplicating them would
// break constraint independence); the terminal stage has no controls.
Matrix bound_rows(int dim, bool with_state_bounds, bool with_control) {
  const int rows = (with_state_bounds ? 8 : 0) + (with_control ? 2 : 0);
  Matrix sel = Matrix::Zero(rows, dim);
  int r = 0;
  if (with_state_bounds) {
    sel(r++, 3) = -1.0;  // -v <= 0
    sel(r++, 3) = 1.0;   // v <= vmax
    sel(r++, 4) = -1.0;
    sel(r++, 4) = 1.0;
    sel(r++, 5) = -1.0;
    sel(r++, 5) = 1.0;
    sel(r++, 6) = -1.0;
    sel(r++, 6) = 1.0;
  }
  if (with_control) {
    sel(r++, 7) = -1.0;
    sel(r++, 7) = 1.0;
  }
  return sel;
}

Vector bound_offsets(bool with_state_bounds, bool with_control) {
  std::vector<double> off;
  if (with_state_bounds) {
    off.insert(off.end(), {0.0, -kSpeedMax, -kAccelMax, -kAccelMax, -kSteerMax,
                           -kSteerMax, -kSteerRateMax, -kSteerRateMax});
  }
  if (with_control) off.insert(off.end(), {-kJerkMax, -kJerkMax});
  Vector v(static_cast<int>(off.size()));
  for (std::size_t i = 0; i < off.size(); ++i) v(static_cast<int>(i)) = off[i];
  return v;
}

}  // namespace

Vector VehicleState::to_vector() const {
  Vector x(kVehicleStateDim);
  x << X, Y, phi, v, a, delta, delta_rate;
  return x;
}

VehicleState VehicleState::from_vector(const Vector& x) {
  if (x.size() != kVehicleStateDim)
    throw DimensionMismatch("VehicleState::from_vector: need 7 entries");
  VehicleState s;
  s.X = x(0);
  s.Y = x(1);
  s.phi = x(2);
  s.v = x(3);
  s.a = x(4);
  s.delta = x(5);
  s.delta_rate = x(6);
  return s;
}

Vector PersonalizationParams::to_vector() const {
  Vector t(kVehicleParamDim);
  t.head(8) = w;
  t(8) = D;
  t(9) = alpha;
  return t;
}

PersonalizationParams PersonalizationParams::from_vector(const Vector& theta) {
  if (theta.size() != kVehicleParamDim)
    throw DimensionMismatch("PersonalizationParams::from_vector: need 10 entries");
  PersonalizationParams p;
  p.w = theta.head(8);
  p.D = theta(8);
  p.alpha = theta(9);
  return p;
}

PersonalizationParams PersonalizationParams::initial() {
  PersonalizationParams p;
  p.w.resize(8);
  p.w << 16.0, 16.0, 4.0, 8.0, 2.0, 1.0, 0.5, 1.0;
  p.D = 14.0;
  p.alpha = 1.0;
  return p;
}

void PersonalizationParams::validate() const {
  check_weights(w);
  if (!(D > 0.0)) throw DimensionMismatch("PersonalizationParams: D must be > 0");
}

VehicleState vehicle_step(const VehicleState& x, const Vector& u, double dt,
                          double wheelbase) {
  if (u.size() != kVehicleControlDim)
    throw DimensionMismatch("vehicle_step: need 2 controls");
  check_steering(x.delta);
  VehicleState n = x;
  n.X += dt * x.v * std::cos(x.phi);
  n.Y += dt * x.v * std::sin(x.phi);
  n.phi += dt * (x.v / wheelbase) * std::tan(x.delta);
  n.v += dt * x.a;
  n.a += dt * u(0);
  n.delta += dt * x.delta_rate;
  n.delta_rate += dt * u(1);
  return n;
}

std::pair<double, double> lookahead_point(const VehicleState& x, double D,
                                          double alpha) {
  const double heading = x.phi + alpha * x.delta;
  return {x.X + D * std::cos(heading), x.Y + D * std::sin(heading)};
}

Vector vehicle_features(const VehicleState& x, double u1, double D, double alpha) {
  return eval_features(x, u1, D, alpha, /*with_control=*/true).tau;
}

Vector stage_cost_residual(const VehicleState& x, const Vector& u,
                           const Vector& tau_ref,
                           const PersonalizationParams& theta) {
  check_weights(theta.w);
  if (u.size() != kVehicleControlDim)
    throw DimensionMismatch("stage_cost_residual: need 2 controls");
  if (tau_ref.size() != kVehicleFeatureDim)
    throw DimensionMismatch("stage_cost_residual: tau_ref must have 8 entries");
  const Vector tau = vehicle_features(x, u(0), theta.D, theta.alpha);
  return theta.w.cwiseSqrt().cwiseProduct(tau - tau_ref);
}

std::string scenario_name(Scenario s) {
  return s == Scenario::straight ? "straight" : "curve";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "straight") return Scenario::straight;
  if (name == "curve") return Scenario::curve;
  throw DimensionMismatch("unknown scenario: " + name);
}

SqpSettings vehicle_solver_settings() {
  SqpSettings s;
  s.kkt_tolerance = 1e-7;
  return s;
}

Reference build_reference(Scenario scenario, double dt, int samples,
                          double wheelbase) {
  if (samples < 0) throw DimensionMismatch("build_reference: samples < 0");
  Reference ref;
  ref.dt = dt;
  ref.points.resize(static_cast<std::size_t>(samples));
  ref.target_speed.resize(static_cast<std::size_t>(samples));
  if (samples == 0) return ref;

  const double v_low = 15.0 / 3.6;
  const double v_high = 25.0 / 3.6;

  if (scenario == Scenario::straight) {
    // Hold 15 km/h for 2 s, ramp at 1.15 m/s^2, then hold 25 km/h. The
    // acceleration column is the discrete-consistent (v[k+1]-v[k])/dt.
    const int hold = static_cast<int>(std::lround(2.0 / dt));
    std::vector<double> v(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
      if (k <= hold) {
        v[static_cast<std::size_t>(k)] = v_low;
      } else {
        v[static_cast<std::size_t>(k)] =
            std::min(v_high, v[static_cast<std::size_t>(k) - 1] + dt * 1.15);
      }
    }
    double xpos = 0.0;
    for (int k = 0; k < samples; ++k) {
      RefPoint& p = ref.points[static_cast<std::size_t>(k)];
      p.state.X = xpos;
      p.state.Y = 0.0;
      p.state.phi = 0.0;
      p.state.v = v[static_cast<std::size_t>(k)];
      p.state.a = k + 1 < samples
                      ? (v[static_cast<std::size_t>(k) + 1] -
                         v[static_cast<std::size_t>(k)]) /
                            dt
                      : 0.0;
      ref.target_speed[static_cast<std::size_t>(k)] =
          v[static_cast<std::size_t>(k)];
      xpos += dt * v[static_cast<std::size_t>(k)];
    }
  } else {
    // Straight lead-in for 2 s, then a circular arc of radius 12 m, all at a
    // constant 15 km/h, integrated with the same forward-Euler rule as the
    // model so the path is exactly realizable at delta = atan(L/R). The
    // turn-in transient is where the steering-related weights and the
    // look-ahead parameters shape the trajectory.
    const double radius = 12.0;
    const double delta_ref = std::atan(wheelbase / radius);
    const int lead = static_cast<int>(std::lround(2.0 / dt));
    double xpos = 0.0, ypos = 0.0, yaw = 0.0;
    for (int k = 0; k < samples; ++k) {
      const bool arc = k >= lead;
      RefPoint& p = ref.points[static_cast<std::size_t>(k)];
      p.state.X = xpos;
      p.state.Y = ypos;
      p.state.phi = yaw;
      p.state.v = v_low;
      p.state.a = 0.0;
      p.state.delta = arc ? delta_ref : 0.0;
      p.state.delta_rate = 0.0;
      ref.target_speed[static_cast<std::size_t>(k)] = v_low;
      xpos += dt * v_low * std::cos(yaw);
      ypos += dt * v_low * std::sin(yaw);
      if (arc) yaw += dt * (v_low / wheelbase) * std::tan(delta_ref);
    }
  }
  return ref;
}

OcpDefinition build_vehicle_ocp(const Reference& ref, int start, int horizon,
                                double wheelbase) {
  if (horizon < 1) throw DimensionMismatch("build_vehicle_ocp: horizon < 1");
  if (start < 0 ||
      start + horizon >= static_cast<int>(ref.points.size()))
    throw DimensionMismatch("build_vehicle_ocp: reference window out of range");
  const double dt = ref.dt;
  std::vector<RefPoint> window(ref.points.begin() + start,
                               ref.points.begin() + start + horizon + 1);

  OcpDefinition ocp;
  ocp.horizon = horizon;
  ocp.state_dim = kVehicleStateDim;
  ocp.control_dim = kVehicleControlDim;
  ocp.param_dim = kVehicleParamDim;
  ocp.constraints_param_independent = true;

  auto split_theta = [](const Vector& theta) {
    if (theta.size() != kVehicleParamDim)
      throw DimensionMismatch("vehicle ocp: theta must have 10 entries");
    return PersonalizationParams::from_vector(theta);
  };

  ocp.residual = [window, horizon](int k, const Vector& xi, const Vector& theta) {
    const PersonalizationParams p = PersonalizationParams::from_vector(theta);
    check_weights(p.w);
    const bool stage = k < horizon;
    const VehicleState x = state_from_xi(xi);
    const double u1 = stage ? xi(7) : 0.0;
    const RefPoint& rp = window[static_cast<std::size_t>(k)];
    const FeatureEval f = eval_features(x, u1, p.D, p.alpha, stage);
    const FeatureEval fr = reference_targets(rp, p.D, p.alpha, stage);
    const Vector wts = aligned_weights(p.w, stage);
    Vector r(f.tau.size() + (stage ? 1 : 0));
    r.head(f.tau.size()) = wts.cwiseSqrt().cwiseProduct(f.tau - fr.tau);
    if (stage) r(f.tau.size()) = std::sqrt(kSteerSmoothWeight) * xi(8);
    return r;
  };
  ocp.residual_jac_xi = [window, horizon, split_theta](int k, const Vector& xi,
                                                       const Vector& theta) {
    const PersonalizationParams p = split_theta(theta);
    check_weights(p.w);
    const bool stage = k < horizon;
    const VehicleState x = state_from_xi(xi);
    const double u1 = stage ? xi(7) : 0.0;
    const FeatureEval f = eval_features(x, u1, p.D, p.alpha, stage);
    const Vector sqw = aligned_weights(p.w, stage).cwiseSqrt();
    Matrix j = Matrix::Zero(f.tau.size() + (stage ? 1 : 0), xi.size());
    j.topRows(f.tau.size()) = sqw.asDiagonal() * f.jac;
    if (stage) j(f.tau.size(), 8) = std::sqrt(kSteerSmoothWeight);
    return j;
  };
  ocp.residual_jac_theta = [window, horizon, split_theta](int k, const Vector& xi,
                                                          const Vector& theta) {
    const PersonalizationParams p = split_theta(theta);
    check_weights(p.w);
    const bool stage = k < horizon;
    const VehicleState x = state_from_xi(xi);
    const double u1 = stage ? xi(7) : 0.0;
    const RefPoint& rp = window[static_cast<std::size_t>(k)];
    const FeatureEval f = eval_features(x, u1, p.D, p.alpha, stage);
    const FeatureEval fr = reference_targets(rp, p.D, p.alpha, stage);
    const Vector wts = aligned_weights(p.w, stage);
    const Vector err = f.tau - fr.tau;
    const int rows = static_cast<int>(f.tau.size()) + (stage ? 1 : 0);
    Matrix j = Matrix::Zero(rows, kVehicleParamDim);
    // d/dw_i of sqrt(w_i) e_i = e_i / (2 sqrt(w_i)); row order maps back to
    // the weight index (u1's weight is w6, delta_rate's is w7).
    for (int i = 0; i < f.tau.size(); ++i) {
      int widx = i;
      if (!stage && i == 6) widx = 7;
      const double sw = std::sqrt(wts(i));
      j(i, widx) = sw > 0.0 ? err(i) / (2.0 * sw)
                            : std::numeric_limits<double>::infinity() * err(i);
      if (wts(i) == 0.0 && err(i) == 0.0) j(i, widx) = 0.0;
      j(i, 8) = sw * (f.d_D(i) - fr.d_D(i));
      j(i, 9) = sw * (f.d_alpha(i) - fr.d_alpha(i));
    }
    return j;
  };

  ocp.dynamics = [dt, wheelbase](int, const Vector& xi, const Vector&) {
    const VehicleState x = state_from_xi(xi);
    return vehicle_step(x, xi.tail(kVehicleControlDim), dt, wheelbase)
        .to_vector();
  };
  ocp.dynamics_jac_xi = [dt, wheelbase](int, const Vector& xi, const Vector&) {
    const VehicleState x = state_from_xi(xi);
    check_steering(x.delta);
    Matrix j = Matrix::Zero(kVehicleStateDim, 9);
    j.leftCols(kVehicleStateDim).setIdentity();
    const double c = std::cos(x.phi), s = std::sin(x.phi);
    const double t = std::tan(x.delta);
    const double sec2 = 1.0 + t * t;
    j(0, 2) = -dt * x.v * s;
    j(0, 3) = dt * c;
    j(1, 2) = dt * x.v * c;
    j(1, 3) = dt * s;
    j(2, 3) = dt * t / wheelbase;
    j(2, 5) = dt * x.v * sec2 / wheelbase;
    j(3, 4) = dt;
    j(4, 7) = dt;
    j(5, 6) = dt;
    j(6, 8) = dt;
    return j;
  };
  ocp.dynamics_jac_theta = [](int, const Vector&, const Vector&) {
    return Matrix(Matrix::Zero(kVehicleStateDim, kVehicleParamDim));
  };

  ocp.inequality = [horizon](int k, const Vector& xi, const Vector&) {
    const bool with_state = k > 0;
    const bool with_control = k < horizon;
    const Matrix sel = bound_rows(static_cast<int>(xi.size()), with_state,
                                  with_control);
    return Vector(sel * xi + bound_offsets(with_state, with_control));
  };
  ocp.inequality_jac_xi = [horizon](int k, const Vector& xi, const Vector&) {
    return bound_rows(static_cast<int>(xi.size()), k > 0, k < horizon);
  };
  ocp.inequality_jac_theta = [horizon](int k, const Vector& xi, const Vector&) {
    const int rows = static_cast<int>(
        bound_offsets(k > 0, k < horizon).size());
    (void)xi;
    return Matrix(Matrix::Zero(rows, kVehicleParamDim));
  };
  return ocp;
}

PersonalizationParams demo_driver_params() {
  PersonalizationParams p;
  p.w.resize(8);
  p.w << 12.0, 20.0, 3.0, 6.0, 1.5, 0.8, 0.4, 0.7;
  p.D = 11.0;
  p.alpha = 0.8;
  return p;
}

Vector Demo::slice(int start, int horizon) const {
  if (start < 0 || start + horizon > steps())
    throw DimensionMismatch("Demo::slice: window out of range");
  const int step = kVehicleStateDim + kVehicleControlDim;
  Vector xi(horizon * step + kVehicleStateDim);
  for (int k = 0; k < horizon; ++k) {
    xi.segment(k * step, kVehicleStateDim) =
        states[static_cast<std::size_t>(start + k)].to_vector();
    xi.segment(k * step + kVehicleStateDim, kVehicleControlDim) =
        controls[static_cast<std::size_t>(start + k)];
  }
  xi.tail(kVehicleStateDim) =
      states[static_cast<std::size_t>(start + horizon)].to_vector();
  return xi;
}

Demo generate_demo(const PersonalizationParams& theta_star, Scenario scenario,
                   double noise_std, std::uint64_t seed,
                   const DemoOptions& options) {
  theta_star.validate();
  if (noise_std < 0.0)
    throw DimensionMismatch("generate_demo: noise_std must be >= 0");
  Demo demo;
  demo.scenario = scenario;
  demo.dt = options.dt;
  demo.horizon = options.horizon;
  demo.wheelbase = options.wheelbase;
  const int steps =
      options.steps > 0 ? options.steps
                        : (scenario == Scenario::straight ? 150 : 100);
  demo.reference = build_reference(scenario, options.dt,
                                   steps + options.horizon + 1,
                                   options.wheelbase);

  const Vector theta = theta_star.to_vector();
  VehicleState x = demo.reference.points[0].state;
  demo.states.push_back(x);
  const int stage = kVehicleStateDim + kVehicleControlDim;
  // Plans are applied in full horizon-sized blocks before re-planning, so the
  // logged trajectory restricted to a block is exactly the solution of that
  // block's OCP. Training windows aligned with the blocks then reproduce the
  // demonstration bit for bit when solved at theta_star.
  for (int t = 0; t < steps; t += options.horizon) {
    const OcpDefinition ocp =
        build_vehicle_ocp(demo.reference, t, options.horizon, options.wheelbase);
    // Warm start: hold the controls at zero from the current state. This is
    // dynamically feasible, so the merit function starts from zero violation.
    Vector warm(ocp.total_xi_dim());
    VehicleState w = x;
    for (int k = 0; k < options.horizon; ++k) {
      warm.segment(k * stage, kVehicleStateDim) = w.to_vector();
      warm.segment(k * stage + kVehicleStateDim, kVehicleControlDim).setZero();
      w = vehicle_step(w, Vector::Zero(kVehicleControlDim), options.dt,
                       options.wheelbase);
    }
    warm.tail(kVehicleStateDim) = w.to_vector();
    const SolvedTrajectory traj =
        solve_ocp(ocp, theta, x.to_vector(), options.solver, &warm);
    const int applied = std::min(options.horizon, steps - t);
    for (int k = 0; k < applied; ++k) {
      // Log the plan itself rather than a re-integration of its controls;
      // like real demonstrations, the data then satisfies the dynamics only
      // up to the forward solver's feasibility tolerance.
      demo.controls.push_back(traj.control(ocp, k));
      demo.states.push_back(VehicleState::from_vector(traj.state(ocp, k + 1)));
    }
    x = VehicleState::from_vector(traj.state(ocp, applied));
  }

  if (noise_std > 0.0) {
    Rng rng(Rng::child_seed(seed, 0xdecade,
                            scenario == Scenario::straight ? 1 : 2));
    for (VehicleState& s : demo.states) {
      Vector v = s.to_vector();
      for (int i = 0; i < v.size(); ++i) v(i) += noise_std * rng.normal();
      s = VehicleState::from_vector(v);
    }
    for (Vector& u : demo.controls)
      for (int i = 0; i < u.size(); ++i) u(i) += noise_std * rng.normal();
  }
  return demo;
}

SegmentSet segment_demo(const Demo& demo, int stride) {
  if (stride < 1) throw DimensionMismatch("segment_demo: stride must be >= 1");
  if (demo.steps() < demo.horizon)
    throw DimensionMismatch("segment_demo: demo shorter than one horizon");
  SegmentSet set;
  set.horizon = demo.horizon;
  for (int s = 0; s + demo.horizon <= demo.steps(); s += stride)
    set.starts.push_back(s);
  return set;
}

ImitationStepResult imitation_step(const PersonalizationParams& theta,
                                   const Demo& demo, const SegmentSet& segments,
                                   double learning_rate, HessianMode mode,
                                   const SqpSettings& solver) {
  theta.validate();
  if (segments.starts.empty())
    throw EmptyInput("imitation_step: no segments");
  const Vector tvec = theta.to_vector();
  ImitationStepResult res;
  res.gradient = Vector::Zero(kVehicleParamDim);

  for (int start : segments.starts) {
    const OcpDefinition ocp = build_vehicle_ocp(
        demo.reference, start, segments.horizon, demo.wheelbase);
    const Vector warm = demo.slice(start, segments.horizon);
    const Vector x_init = demo.states[static_cast<std::size_t>(start)].to_vector();
    const SolvedTrajectory traj = solve_ocp(ocp, tvec, x_init, solver, &warm);

    const Vector diff = traj.xi - warm;
    res.loss += diff.squaredNorm();

    const auto t0 = Clock::now();
    const DiffKktSystem sys = assemble_dkkt(ocp, tvec, traj, mode);
    const auto t1 = Clock::now();
    // The Cholesky route requires the Gauss-Newton PSD Hessian; the exact
    // Hessian can be indefinite away from the optimum, where only the LU
    // route is applicable.
    const TrajectoryDerivatives der = mode == HessianMode::gauss_newton
                                          ? fastdoc_backward(sys)
                                          : blocklu_backward(sys);
    const auto t2 = Clock::now();
    res.build_ns += elapsed_ns(t0, t1);
    res.solve_ns += elapsed_ns(t1, t2);
    res.gradient.noalias() += 2.0 * (der.dxi_dtheta.transpose() * diff);
  }
  if (!all_finite(res.gradient) || !std::isfinite(res.loss))
    throw GradientNonFinite("imitation_step: non-finite loss or gradient");

  Vector next = tvec - learning_rate * res.gradient;
  next.head(8) = next.head(8).cwiseMax(1e-6);  // w >= 1e-6
  next(8) = std::max(next(8), 0.1);            // D >= 0.1
  res.theta_next = PersonalizationParams::from_vector(next);
  return res;
}

TrainingConfig TrainingConfig::defaults(Scenario scenario) {
  TrainingConfig cfg;
  cfg.scenario = scenario;
  if (scenario == Scenario::straight) {
    cfg.max_iter = 1000;
    cfg.learning_rate = 0.01;
  } else {
    cfg.max_iter = 300;
    cfg.learning_rate = 0.001;
  }
  return cfg;
}

void TrainingConfig::validate() const {
  if (max_iter < 0) throw DimensionMismatch("TrainingConfig: max_iter < 0");
  if (!(learning_rate > 0.0))
    throw DimensionMismatch("TrainingConfig: learning rate must be > 0");
  if (stride < 1) throw DimensionMismatch("TrainingConfig: stride must be >= 1");
  if (!(dt > 0.0) || !(wheelbase > 0.0))
    throw DimensionMismatch("TrainingConfig: dt and wheelbase must be > 0");
}

TrainingLog train(const TrainingConfig& config, const Demo& demo,
                  const PersonalizationParams& theta_init) {
  config.validate();
  const SegmentSet segments = segment_demo(demo, config.stride);
  TrainingLog log;
  PersonalizationParams theta = theta_init;

  auto snapshot = [](TrainingIteration& row, const PersonalizationParams& p) {
    row.has_theta = true;
    row.theta = p.to_vector();
  };

  if (config.max_iter == 0) {
    ImitationStepResult res = imitation_step(theta, demo, segments,
                                             /*learning_rate=*/0.0, config.mode,
                                             config.solver);
    TrainingIteration row;
    row.iter = 0;
    row.loss = res.loss;
    row.build_ns = res.build_ns;
    row.solve_ns = res.solve_ns;
    snapshot(row, theta);
    log.iterations.push_back(std::move(row));
    log.final_theta = theta;
    return log;
  }

  int consecutive_failures = 0;
  for (int iter = 0; iter < config.max_iter; ++iter) {
    TrainingIteration row;
    row.iter = iter;
    try {
      ImitationStepResult res =
          imitation_step(theta, demo, segments, config.learning_rate,
                         config.mode, config.solver);
      row.loss = res.loss;
      row.build_ns = res.build_ns;
      row.solve_ns = res.solve_ns;
      if (iter % 10 == 0 || iter == config.max_iter - 1) snapshot(row, theta);
      theta = res.theta_next;
      consecutive_failures = 0;
    } catch (const Error&) {
      row.loss = std::numeric_limits<double>::quiet_NaN();
      if (++consecutive_failures >= 5) throw;
    }
    log.iterations.push_back(std::move(row));
  }
  log.final_theta = theta;
  return log;
}

}  // namespace fastdoc
