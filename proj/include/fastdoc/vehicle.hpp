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
#ifndef FASTDOC_VEHICLE_HPP_
#define FASTDOC_VEHICLE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fastdoc/kkt_assembly.hpp"
#include "fastdoc/ocp.hpp"
#include "fastdoc/sqp.hpp"

namespace fastdoc {

inline constexpr int kVehicleStateDim = 7;
inline constexpr int kVehicleControlDim = 2;
inline constexpr int kVehicleParamDim = 10;  // 8 weights + D + alpha
inline constexpr int kVehicleFeatureDim = 8;

/// Fixed (non-learnable) quadratic regularizer on the steering acceleration
/// input; it is the only cost term touching u2, keeping every stage Hessian
/// nonsingular under the Gauss-Newton approximation.
inline constexpr double kSteerSmoothWeight = 1e-4;

/// Kinematic single-track state. The paired controls are u1 = jerk (da/dt)
/// and u2 = steering acceleration (d delta_rate/dt).
struct VehicleState {
  double X = 0.0;
  double Y = 0.0;
  double phi = 0.0;
  double v = 0.0;
  double a = 0.0;
  double delta = 0.0;
  double delta_rate = 0.0;

  Vector to_vector() const;
  static VehicleState from_vector(const Vector& x);
};

/// Learnable parameters theta = (w, D, alpha): eight nonnegative feature
/// weights, the look-ahead distance and the steering/look-ahead coupling.
struct PersonalizationParams {
  Vector w = Vector::Zero(8);
  double D = 1.0;
  double alpha = 0.0;

  Vector to_vector() const;
  static PersonalizationParams from_vector(const Vector& theta);
  /// Initial values from the experiment table: w = (16,16,4,8,2,1,0.5,1),
  /// D = 14, alpha = 1.
  static PersonalizationParams initial();
  void validate() const;  // w >= 0 elementwise, D > 0
};

/// Forward-Euler step of the 7-state kinematic model with wheelbase L:
///   X += dt v cos(phi), Y += dt v sin(phi), phi += dt (v/L) tan(delta),
///   v += dt a, a += dt u1, delta += dt delta_rate, delta_rate += dt u2.
/// Throws SteeringSingularity when |delta| >= pi/2 - 1e-6.
VehicleState vehicle_step(const VehicleState& x, const Vector& u, double dt,
                          double wheelbase);

/// (X_la, Y_la) = (X + D cos(phi + alpha delta), Y + D sin(phi + alpha delta)).
std::pair<double, double> lookahead_point(const VehicleState& x, double D,
                                          double alpha);

/// Feature vector tau = (X_la, Y_la, phi, v, delta, a, u1, delta_rate).
Vector vehicle_features(const VehicleState& x, double u1, double D, double alpha);

/// phi_k = W^{1/2} (tau - tau_ref) with W = diag(w). Throws NegativeWeight.
Vector stage_cost_residual(const VehicleState& x, const Vector& u,
                           const Vector& tau_ref,
                           const PersonalizationParams& theta);

enum class Scenario { straight, curve };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

/// One reference sample: the pose the driver is asked to track plus the
/// reference jerk feature (zero for both built-in scenarios).
struct RefPoint {
  VehicleState state;
  double u1 = 0.0;
};

struct Reference {
  double dt = 0.1;
  std::vector<RefPoint> points;
  std::vector<double> target_speed;  // same length as points
};

/// Builds `samples` reference points.
///   straight: line along +X, speed ramping 15 -> 25 km/h with the reference
///             acceleration capped at 1.15 m/s^2 (below the 1.2 limit);
///   curve:    arc of radius 12 m at a constant 15 km/h, integrated with the
///             same forward-Euler rule as the model so the path is exactly
///             realizable at delta = atan(L/R).
Reference build_reference(Scenario scenario, double dt, int samples,
                          double wheelbase = 2.7);

/// Tracking OCP over reference window [start, start + horizon]. Stage
/// residuals are the weighted feature errors against the reference features
/// (evaluated with the same (D, alpha)) plus the fixed u2 smoothing row;
/// the terminal residual drops the u1 slot. Inequalities are the table box
/// bounds; state bounds are omitted at stage 0 where the initial condition
/// already pins the state.
OcpDefinition build_vehicle_ocp(const Reference& ref, int start, int horizon,
                                double wheelbase = 2.7);

/// A logged demonstration: states (steps + 1), controls (steps), and the
/// reference it was driven along (steps + horizon + 1 samples).
struct Demo {
  Scenario scenario = Scenario::straight;
  double dt = 0.1;
  int horizon = 5;
  double wheelbase = 2.7;
  std::vector<VehicleState> states;
  std::vector<Vector> controls;
  Reference reference;

  int steps() const { return static_cast<int>(controls.size()); }
  /// Stacked stage variables of the demo slice [start, start + horizon].
  Vector slice(int start, int horizon) const;
};

/// Solver preset for the driving OCPs. The quadratic steering-rate term
/// (kSteerSmoothWeight) makes the reduced Hessian span roughly five orders
/// of magnitude, which puts the attainable KKT floor near 1e-9; a 1e-7
/// tolerance stays well above that floor while the loose directions are
/// still resolved to ~1e-5 through the dynamics coupling.
SqpSettings vehicle_solver_settings();

struct DemoOptions {
  int steps = -1;  // -1: scenario default (150 straight, 100 curve)
  int horizon = 5;
  double dt = 0.1;
  double wheelbase = 2.7;
  SqpSettings solver = vehicle_solver_settings();
};

/// Built-in driver profile used as the default target of synthetic
/// demonstrations: w = (12, 20, 3, 6, 1.5, 0.8, 0.4, 0.7), D = 11,
/// alpha = 0.8. Distinct from the training initialization in every
/// component, so imitation from PersonalizationParams::initial() has to
/// move the whole parameter vector.
PersonalizationParams demo_driver_params();

/// Receding-horizon rollout at theta_star: solve the horizon-length OCP from
/// the current state, apply the whole plan, re-plan from its terminal state.
/// Blocks therefore tile the demonstration, and a training window aligned
/// with a block reproduces it exactly when solved at theta_star. Gaussian
/// noise with standard deviation noise_std is then added to the logged states
/// and controls (not to the rollout itself), so noisy demos are near- but not
/// exactly optimal.
Demo generate_demo(const PersonalizationParams& theta_star, Scenario scenario,
                   double noise_std, std::uint64_t seed,
                   const DemoOptions& options = DemoOptions());

/// Training segments: OCP windows of the demo starting at `starts[i]`.
struct SegmentSet {
  std::vector<int> starts;
  int horizon = 5;
};

/// Every `stride`-th window start such that the full horizon fits.
SegmentSet segment_demo(const Demo& demo, int stride);

struct ImitationStepResult {
  double loss = 0.0;
  Vector gradient;  // dL/dtheta, size 10
  PersonalizationParams theta_next;
  std::int64_t build_ns = 0;  // differential KKT assembly time
  std::int64_t solve_ns = 0;  // structured backward time
};

/// One imitation update: solves each segment OCP at theta, accumulates the
/// trajectory-level loss L = sum over segments of |xi(theta) - xi_demo|^2 and
/// its gradient through the structured backward pass, then applies
/// theta <- theta - lr dL/dtheta and projects w >= 1e-6, D >= 0.1.
ImitationStepResult imitation_step(const PersonalizationParams& theta,
                                   const Demo& demo, const SegmentSet& segments,
                                   double learning_rate,
                                   HessianMode mode = HessianMode::gauss_newton,
                                   const SqpSettings& solver =
                                       vehicle_solver_settings());

struct TrainingConfig {
  Scenario scenario = Scenario::straight;
  int max_iter = 1000;
  double learning_rate = 0.01;
  double dt = 0.1;
  double wheelbase = 2.7;
  int stride = 5;
  HessianMode mode = HessianMode::gauss_newton;
  SqpSettings solver = vehicle_solver_settings();

  /// Table defaults: straight 1000 iterations at 0.01, curve 300 at 0.001.
  static TrainingConfig defaults(Scenario scenario);
  void validate() const;
};

struct TrainingIteration {
  int iter = 0;
  double loss = 0.0;
  std::int64_t build_ns = 0;
  std::int64_t solve_ns = 0;
  bool has_theta = false;
  Vector theta;  // snapshot every 10 iterations and on the last row
};

struct TrainingLog {
  std::vector<TrainingIteration> iterations;
  PersonalizationParams final_theta;
};

/// Gradient-descent imitation learning. Row i logs the loss at the pre-update
/// theta of iteration i; max_iter = 0 logs only the initial loss. Aborts
/// (rethrows) after 5 consecutive failed steps; isolated failures skip the
/// update and keep going.
TrainingLog train(const TrainingConfig& config, const Demo& demo,
                  const PersonalizationParams& theta_init);

}  // namespace fastdoc

#endif  // FASTDOC_VEHICLE_HPP_
