#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "attprop/errors.hpp"
#include "attprop/so3.hpp"

namespace attprop {

/// Inertial direction of gravity.
inline const Vec3 kGravityAxis = Vec3::UnitZ();

/// Rigid body on a fixed frictionless pivot under uniform gravity.
struct RigidBodyParams {
  Mat3 J = Mat3::Identity();  // inertia about the pivot, body frame [kg m^2]
  double m = 1.0;             // [kg]
  double g = 9.81;            // [m/s^2]
  Vec3 rho = Vec3::UnitZ();   // pivot to center of mass, body frame [m]

  /// Nonstandard inertia tr(J)/2 * I - J used by the variational integrator.
  [[nodiscard]] Mat3 Jd() const {
    return 0.5 * J.trace() * Mat3::Identity() - J;
  }

  /// Human-readable list of broken invariants; empty when valid.
  /// g = 0 is accepted so that free-body limits can be expressed.
  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!J.allFinite() || !rho.allFinite() || !std::isfinite(m) ||
        !std::isfinite(g)) {
      out.emplace_back("body: non-finite entry");
      return out;
    }
    if ((J - J.transpose()).norm() > 1e-12 * J.norm()) {
      out.emplace_back("body.J: not symmetric");
    }
    const Mat3 Js = 0.5 * (J + J.transpose());
    const Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(Js).eigenvalues();
    if (!(ev.minCoeff() > 0.0)) {
      std::ostringstream os;
      os << "body.J: not positive definite (min eigenvalue " << ev.minCoeff()
         << ")";
      out.push_back(os.str());
    }
    const Mat3 jd = 0.5 * Js.trace() * Mat3::Identity() - Js;
    const Vec3 evd = Eigen::SelfAdjointEigenSolver<Mat3>(jd).eigenvalues();
    if (!(evd.minCoeff() > 0.0)) {
      std::ostringstream os;
      os << "body.J: J_d = tr(J)/2*I - J is not positive definite (min "
            "eigenvalue "
         << evd.minCoeff() << "); principal moments violate the triangle "
         << "inequality";
      out.push_back(os.str());
    }
    if (!(m > 0.0)) out.emplace_back("body.m: must be > 0");
    if (!(g >= 0.0)) out.emplace_back("body.g: must be >= 0");
    if (!(rho.norm() > 0.0)) out.emplace_back("body.rho: must be nonzero");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) {
      std::string msg = "invalid rigid body parameters:";
      for (const auto& s : v) msg += "\n  " + s;
      throw InvalidArgument(msg);
    }
  }
};

/// Direction of gravity in the body frame, R^T e3.
[[nodiscard]] inline Vec3 reduced_attitude(const AttitudeState& s) {
  return s.R.matrix().transpose() * kGravityAxis;
}

/// m g rho x R^T e3 [N m].
[[nodiscard]] inline Vec3 gravity_moment(const RigidBodyParams& p,
                                         const Rotation& R) {
  return p.m * p.g * p.rho.cross(R.matrix().transpose() * kGravityAxis);
}

/// Time derivatives (R_dot, Omega_dot) of the continuous pendulum equations.
[[nodiscard]] inline std::pair<Mat3, Vec3> continuous_rhs(
    const RigidBodyParams& p, const AttitudeState& s) {
  const Mat3 r_dot = s.R.matrix() * so3::hat(s.Omega);
  const Vec3 J_omega = p.J * s.Omega;
  const Vec3 omega_dot =
      p.J.ldlt().solve(J_omega.cross(s.Omega) + gravity_moment(p, s.R));
  return {r_dot, omega_dot};
}

/// Total energy 1/2 Omega^T J Omega - m g rho^T R^T e3. Minimal at the hanging equilibrium.
[[nodiscard]] inline double energy(const RigidBodyParams& p,
                                   const AttitudeState& s) {
  return 0.5 * s.Omega.dot(p.J * s.Omega) - p.m * p.g * p.rho.dot(reduced_attitude(s));
}

/// Spatial angular momentum about the vertical, e3^T R J Omega.
[[nodiscard]] inline double vertical_momentum(const RigidBodyParams& p,
                                              const AttitudeState& s) {
  return kGravityAxis.dot(s.R.matrix() * (p.J * s.Omega));
}

namespace detail {

// Half turn about the coordinate axis least aligned with unit vector v,
// made orthogonal to v. Maps v to -v.
inline Mat3 half_turn_orthogonal_to(const Vec3& v) {
  Eigen::Index axis = 0;
  v.cwiseAbs().minCoeff(&axis);
  Vec3 a = Vec3::Unit(axis);
  a -= a.dot(v) * v;
  a.normalize();
  return 2.0 * a * a.transpose() - Mat3::Identity();
}

// Rotation with R * from == to, for unit vectors. Obtuse pairs are aligned
// onto -to first and then flipped by a half turn.
inline Rotation rotation_aligning(const Vec3& from, const Vec3& to) {
  const double c = from.dot(to);
  if (c >= 0.0) {
    const Mat3 k = so3::hat(from.cross(to));
    return Rotation::unchecked(Mat3::Identity() + k + k * k / (1.0 + c));
  }
  if (c <= -1.0 + 1e-15) return Rotation::unchecked(half_turn_orthogonal_to(from));
  return Rotation::unchecked(half_turn_orthogonal_to(to) *
                             rotation_aligning(from, -to).matrix());
}

}  // namespace detail

/// Rest state with R^T e3 = rho / |rho|. Returns the identity when rho is along +e3.
[[nodiscard]] inline AttitudeState hanging_equilibrium(
    const RigidBodyParams& p) {
  return {detail::rotation_aligning(p.rho.normalized(), kGravityAxis),
          Vec3::Zero()};
}

/// Rest state with R^T e3 = -rho / |rho|.
[[nodiscard]] inline AttitudeState inverted_equilibrium(
    const RigidBodyParams& p) {
  return {detail::rotation_aligning(p.rho.normalized(), -kGravityAxis),
          Vec3::Zero()};
}

/// Nearest rotation in the Frobenius norm (polar factor).
[[nodiscard]] inline Rotation project_to_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  return Rotation::unchecked(svd.matrixU() * d * svd.matrixV().transpose());
}

/// Classical RK4 on the embedded equations followed by polar re-projection.
/// Reference solution for integrator order and conservation checks.
[[nodiscard]] inline AttitudeState rk4_step(const RigidBodyParams& p,
                                            const AttitudeState& s, double h) {
  if (!(h > 0.0)) throw InvalidArgument("rk4_step: h must be > 0");
  const auto eval = [&p](const Mat3& R, const Vec3& w) {
    return continuous_rhs(p, AttitudeState{Rotation::unchecked(R), w});
  };
  const Mat3& R0 = s.R.matrix();
  const auto [kr1, kw1] = eval(R0, s.Omega);
  const auto [kr2, kw2] = eval(R0 + 0.5 * h * kr1, s.Omega + 0.5 * h * kw1);
  const auto [kr3, kw3] = eval(R0 + 0.5 * h * kr2, s.Omega + 0.5 * h * kw2);
  const auto [kr4, kw4] = eval(R0 + h * kr3, s.Omega + h * kw3);
  const Mat3 R1 = R0 + (h / 6.0) * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
  const Vec3 w1 = s.Omega + (h / 6.0) * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
  return {project_to_rotation(R1), w1};
}

}  // namespace attprop
