#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "attprop/errors.hpp"

namespace attprop {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

namespace so3 {

/// Below this angle exp/log switch to fourth-order Taylor expansions.
inline constexpr double kSmallAngle = 1e-4;
/// log() refuses rotations whose angle is closer than this to pi.
inline constexpr double kAntipodalMargin = 1e-6;
/// Largest |M + M^T|_max accepted by vee().
inline constexpr double kSkewTolerance = 1e-9;

/// Skew-symmetric matrix with hat(a) * b == a.cross(b).
[[nodiscard]] inline Mat3 hat(const Vec3& a) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -a.z(),  a.y(),
        a.z(),    0.0, -a.x(),
       -a.y(),  a.x(),    0.0;
  // clang-format on
  return s;
}

/// Inverse of hat(). Throws NotSkew if the symmetric part exceeds kSkewTolerance.
[[nodiscard]] inline Vec3 vee(const Mat3& m) {
  const double sym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (!(sym <= kSkewTolerance)) {
    throw NotSkew("vee: symmetric part " + std::to_string(sym) +
                  " exceeds tolerance");
  }
  // Average the two copies of each entry; for an exactly skew input this is exact.
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

}  // namespace so3

/// An element of SO(3), stored as a body-to-inertial rotation matrix.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Validates orthogonality and determinant to 1e-10.
  [[nodiscard]] static Rotation from_matrix(const Mat3& m) {
    const double orth = (m.transpose() * m - Mat3::Identity()).norm();
    const double det = m.determinant();
    if (!(orth <= 1e-10) || !(std::abs(det - 1.0) <= 1e-10)) {
      throw InvalidArgument("matrix is not a rotation (orthogonality defect " +
                            std::to_string(orth) + ", det " +
                            std::to_string(det) + ")");
    }
    return Rotation(m);
  }

  /// Skips validation. Only for matrices known to be rotations up to roundoff.
  [[nodiscard]] static Rotation unchecked(const Mat3& m) { return Rotation(m); }

  [[nodiscard]] static Rotation identity() { return Rotation(); }

  [[nodiscard]] const Mat3& matrix() const noexcept { return m_; }
  [[nodiscard]] Rotation transpose() const { return Rotation(m_.transpose()); }

  [[nodiscard]] double orthogonality_defect() const {
    return (m_.transpose() * m_ - Mat3::Identity()).norm();
  }

  [[nodiscard]] Rotation operator*(const Rotation& other) const {
    return Rotation(m_ * other.m_);
  }
  [[nodiscard]] Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool operator==(const Rotation& other) const { return m_ == other.m_; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}

  Mat3 m_;
};

/// A point of TSO(3): attitude and body-frame angular velocity (rad/s).
struct AttitudeState {
  Rotation R;
  Vec3 Omega = Vec3::Zero();

  bool operator==(const AttitudeState& other) const {
    return R == other.R && Omega == other.Omega;
  }
};

namespace so3 {

/// Rodrigues formula. Exact to roundoff for every f.
[[nodiscard]] inline Rotation exp(const Vec3& f) {
  const double theta2 = f.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = hat(f);
  return Rotation::unchecked(Mat3::Identity() + a * k + b * k * k);
}

/// Principal logarithm. Throws NearAntipodal when the angle exceeds pi - 1e-6.
[[nodiscard]] inline Vec3 log(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  // v = sin(theta) * axis
  const Vec3 v(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
               0.5 * (r(1, 0) - r(0, 1)));
  const double s = v.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(s, c);
  if (theta > std::numbers::pi - kAntipodalMargin) {
    throw NearAntipodal(theta);
  }
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0) * v;
  }
  return (theta / s) * v;
}

/// Rotation angle in [0, pi] without the antipodal check.
[[nodiscard]] inline double angle(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const Vec3 v(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
               0.5 * (r(1, 0) - r(0, 1)));
  return std::atan2(v.norm(), 0.5 * (r.trace() - 1.0));
}

}  // namespace so3

/// Product-chart coordinates [log(R_c^T R); Omega - Omega_c] of `point` about `center`.
[[nodiscard]] inline Vec6 chart(const AttitudeState& center,
                                const AttitudeState& point) {
  Vec6 x;
  x.head<3>() = so3::log(center.R.transpose() * point.R);
  x.tail<3>() = point.Omega - center.Omega;
  return x;
}

/// Inverse of chart(): (R_c exp(x[0:3]), Omega_c + x[3:6]).
[[nodiscard]] inline AttitudeState unchart(const AttitudeState& center,
                                           const Vec6& x) {
  return {center.R * so3::exp(x.head<3>()), center.Omega + x.tail<3>()};
}

}  // namespace attprop
