#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "attprop/attprop.hpp"

namespace attprop::test {

// Elliptic-cylinder pendulum used throughout the test suites.
inline RigidBodyParams elliptic_cylinder() {
  RigidBodyParams p;
  p.J = Vec3(0.13, 0.28, 0.17).asDiagonal();
  p.m = 1.0;
  p.g = 9.81;
  p.rho = Vec3(0.0, 0.0, 0.3);
  return p;
}

inline Mat6 initial_P() {
  const double att = std::pow(5.0 * std::numbers::pi / 180.0, 2);
  const double vel = 0.01 * 0.01;
  Vec6 d;
  d << att, att, att, vel, vel, vel;
  return d.asDiagonal();
}

inline AttitudeState oscillatory_start() { return {Rotation(), Vec3(3.0, 0.1, 0.1)}; }
inline AttitudeState irregular_start() { return {Rotation(), Vec3(4.14, 4.14, 4.14)}; }

inline Rotation rot_x(double a) { return so3::exp(Vec3(a, 0.0, 0.0)); }

// Combined endpoint error between two states.
inline double state_error(const AttitudeState& a, const AttitudeState& b) {
  return (a.R.matrix() - b.R.matrix()).norm() + (a.Omega - b.Omega).norm();
}

// Random well-conditioned SPD 6x6 with attitude block eigenvalues <= max_att.
inline Mat6 random_spd(std::mt19937_64& rng, double max_att = std::pow(10.0 * std::numbers::pi / 180.0, 2)) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat6 a;
  for (int i = 0; i < 36; ++i) a(i / 6, i % 6) = u(rng);
  Eigen::HouseholderQR<Mat6> qr(a);
  const Mat6 q = qr.householderQ();
  std::uniform_real_distribution<double> ev(0.2, 1.0);
  Vec6 lam;
  for (int i = 0; i < 6; ++i) lam[i] = ev(rng);
  Mat6 P = q * lam.asDiagonal() * q.transpose();
  // Scale so the attitude marginal stays below max_att and velocity spread is modest.
  Vec6 scale;
  const double s_att = std::sqrt(max_att);
  scale << s_att, s_att, s_att, 0.05, 0.05, 0.05;
  P = scale.asDiagonal() * P * scale.asDiagonal();
  return 0.5 * (P + P.transpose());
}

}  // namespace attprop::test
