#pragma once

#include <cmath>

#include "fastdoc/ocp.hpp"
#include "fastdoc/rng.hpp"
#include "fastdoc/synthetic.hpp"

namespace fixtures {

using fastdoc::Matrix;
using fastdoc::OcpDefinition;
using fastdoc::Rng;
using fastdoc::Vector;

// Scalar double-integrator-style problem with one step:
//   min 1/2 (x0^2 + u0^2 + x1^2)   s.t.  x1 = x0 + u0 + theta.
// Closed form from x_init = 0: u0 = -theta/2, x1 = theta/2, and
// dxi/dtheta = (0, -1/2, 1/2).
inline OcpDefinition scalar_lq() {
  OcpDefinition ocp;
  ocp.horizon = 1;
  ocp.state_dim = 1;
  ocp.control_dim = 1;
  ocp.param_dim = 1;
  ocp.residual = [](int k, const Vector& xi, const Vector&) {
    return k == 0 ? xi : Vector(xi.head(1));
  };
  ocp.residual_jac_xi = [](int k, const Vector& xi, const Vector&) {
    return Matrix(Matrix::Identity(k == 0 ? 2 : 1, xi.size()));
  };
  ocp.residual_jac_theta = [](int k, const Vector&, const Vector&) {
    return Matrix(Matrix::Zero(k == 0 ? 2 : 1, 1));
  };
  ocp.dynamics = [](int, const Vector& xi, const Vector& theta) {
    return Vector(Vector::Constant(1, xi(0) + xi(1) + theta(0)));
  };
  ocp.dynamics_jac_xi = [](int, const Vector&, const Vector&) {
    return Matrix(Matrix::Ones(1, 2));
  };
  ocp.dynamics_jac_theta = [](int, const Vector&, const Vector&) {
    return Matrix(Matrix::Ones(1, 1));
  };
  return ocp;
}

// Smooth nonlinear tracking instance; see smooth_ocp_instance in the library
// for the construction. Kept under the historical fixture name.
using SmoothInstance = fastdoc::SmoothOcpInstance;

inline SmoothInstance smooth_instance(int nx, int nu, int horizon, int ntheta,
                                      std::uint64_t seed) {
  return fastdoc::smooth_ocp_instance(nx, nu, horizon, ntheta, seed);
}

// One-step problem with a control cap that is active at the optimum:
//   min 1/2 (x0^2 + 0.01 u0^2 + (x1 - 5 theta)^2)
//   s.t. x1 = x0 + u0,  u0 <= 1.
// From x_init = 0 and theta = 1 the unconstrained optimum wants u0 near 5,
// so the cap pins u0 = 1 and the primal solution is insensitive to theta.
inline OcpDefinition capped_control() {
  OcpDefinition ocp;
  ocp.horizon = 1;
  ocp.state_dim = 1;
  ocp.control_dim = 1;
  ocp.param_dim = 1;
  ocp.residual = [](int k, const Vector& xi, const Vector& theta) {
    if (k == 0) {
      Vector r(2);
      r << xi(0), 0.1 * xi(1);
      return r;
    }
    return Vector(Vector::Constant(1, xi(0) - 5.0 * theta(0)));
  };
  ocp.residual_jac_xi = [](int k, const Vector&, const Vector&) {
    if (k == 0) {
      Matrix j = Matrix::Zero(2, 2);
      j(0, 0) = 1.0;
      j(1, 1) = 0.1;
      return j;
    }
    return Matrix(Matrix::Identity(1, 1));
  };
  ocp.residual_jac_theta = [](int k, const Vector&, const Vector&) {
    return k == 0 ? Matrix(Matrix::Zero(2, 1)) : Matrix(Matrix::Constant(1, 1, -5.0));
  };
  ocp.dynamics = [](int, const Vector& xi, const Vector&) {
    return Vector(Vector::Constant(1, xi(0) + xi(1)));
  };
  ocp.dynamics_jac_xi = [](int, const Vector&, const Vector&) {
    return Matrix(Matrix::Ones(1, 2));
  };
  ocp.dynamics_jac_theta = [](int, const Vector&, const Vector&) {
    return Matrix(Matrix::Zero(1, 1));
  };
  ocp.inequality = [](int k, const Vector& xi, const Vector&) {
    return k == 0 ? Vector(Vector::Constant(1, xi(1) - 1.0)) : Vector(0);
  };
  ocp.inequality_jac_xi = [](int k, const Vector& xi, const Vector&) {
    if (k == 0) {
      Matrix j = Matrix::Zero(1, 2);
      j(0, 1) = 1.0;
      return j;
    }
    return Matrix(Matrix::Zero(0, xi.size()));
  };
  ocp.inequality_jac_theta = [](int k, const Vector&, const Vector&) {
    return Matrix(Matrix::Zero(k == 0 ? 1 : 0, 1));
  };
  ocp.constraints_param_independent = true;
  return ocp;
}

}  // namespace fixtures
