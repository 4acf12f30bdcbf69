#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "attprop/errors.hpp"
#include "attprop/pendulum.hpp"
#include "attprop/so3.hpp"

namespace attprop {

/// Fixed-step settings of the Lie group variational integrator.
struct LgviConfig {
  double h = 0.005;            // step size [s]
  double newton_tol = 1e-14;   // bound on |g(f)| for the implicit solve
  int newton_max_iter = 50;

  void validate() const {
    if (!(h > 0.0)) throw InvalidArgument("LgviConfig.h must be > 0");
    if (!(newton_tol > 0.0 && newton_tol < 1e-6)) {
      throw InvalidArgument("LgviConfig.newton_tol must lie in (0, 1e-6)");
    }
    if (newton_max_iter < 1) {
      throw InvalidArgument("LgviConfig.newton_max_iter must be >= 1");
    }
  }
};

/// Uniformly sampled discrete trajectory.
struct Trajectory {
  std::vector<double> times;
  std::vector<AttitudeState> states;
};

namespace lgvi {

/// Central-difference step for the Newton Jacobian.
inline constexpr double kJacobianStep = 1e-7;

namespace detail {

inline Vec3 implicit_residual(const Vec3& f, const Mat3& Jd, const Vec3& rhs) {
  const Mat3 F = so3::exp(f).matrix();
  return so3::vee(F * Jd - Jd * F.transpose()) - rhs;
}

}  // namespace detail

/// Solves h S(J Omega_k + h/2 M_k) = F J_d - J_d F^T for F in SO(3).
///
/// F is parametrized by exponential coordinates f and found by Newton's method
/// on the 3-vector residual, starting from f = h Omega_k, with a
/// central-difference Jacobian. Throws NewtonDiverged if |g(f)| does not drop
/// below cfg.newton_tol within cfg.newton_max_iter iterations.
[[nodiscard]] inline Rotation solve_relative_attitude(const RigidBodyParams& p,
                                                      const LgviConfig& cfg,
                                                      const Vec3& Omega_k,
                                                      const Vec3& M_k) {
  const Mat3 Jd = p.Jd();
  const Vec3 rhs = cfg.h * (p.J * Omega_k + 0.5 * cfg.h * M_k);

  Vec3 f = cfg.h * Omega_k;
  Vec3 r = detail::implicit_residual(f, Jd, rhs);
  for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
    if (r.norm() <= cfg.newton_tol) return so3::exp(f);
    Mat3 jac;
    for (int j = 0; j < 3; ++j) {
      Vec3 df = Vec3::Zero();
      df[j] = kJacobianStep;
      jac.col(j) = (detail::implicit_residual(f + df, Jd, rhs) -
                    detail::implicit_residual(f - df, Jd, rhs)) /
                   (2.0 * kJacobianStep);
    }
    f -= jac.partialPivLu().solve(r);
    if (!f.allFinite()) throw NewtonDiverged(r.norm());
    r = detail::implicit_residual(f, Jd, rhs);
  }
  if (r.norm() <= cfg.newton_tol) return so3::exp(f);
  throw NewtonDiverged(r.norm());
}

/// One step (R_k, Omega_k) -> (R_{k+1}, Omega_{k+1}) of the variational integrator.
[[nodiscard]] inline AttitudeState step(const RigidBodyParams& p,
                                        const LgviConfig& cfg,
                                        const AttitudeState& s) {
  const Vec3 M_k = gravity_moment(p, s.R);
  const Rotation F = solve_relative_attitude(p, cfg, s.Omega, M_k);
  const Rotation R_next = s.R * F;
  const Vec3 M_next = gravity_moment(p, R_next);
  const Mat3& Fm = F.matrix();
  const Vec3 J_omega_next = Fm.transpose() * (p.J * s.Omega) +
                            0.5 * cfg.h * Fm.transpose() * M_k +
                            0.5 * cfg.h * M_next;
  return {R_next, p.J.ldlt().solve(J_omega_next)};
}

/// Advances `s` by n steps in place; NewtonDiverged carries the failing step index.
inline void advance(const RigidBodyParams& p, const LgviConfig& cfg,
                    AttitudeState& s, std::size_t n,
                    std::size_t first_index = 0) {
  for (std::size_t k = 0; k < n; ++k) {
    try {
      s = step(p, cfg, s);
    } catch (const NewtonDiverged& e) {
      throw NewtonDiverged(e.residual(), first_index + k);
    }
  }
}

/// Trajectory of n_steps + 1 states starting at s0, at times k h.
[[nodiscard]] inline Trajectory propagate(const RigidBodyParams& p,
                                          const LgviConfig& cfg,
                                          const AttitudeState& s0,
                                          std::size_t n_steps) {
  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  AttitudeState s = s0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    advance(p, cfg, s, 1, k);
    traj.times.push_back(static_cast<double>(k + 1) * cfg.h);
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace lgvi
}  // namespace attprop
