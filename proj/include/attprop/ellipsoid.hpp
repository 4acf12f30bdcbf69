#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attprop/errors.hpp"
#include "attprop/mvee.hpp"
#include "attprop/random.hpp"
#include "attprop/so3.hpp"

namespace attprop {

/// Hard and soft bounds on the largest eigenvalue of the attitude block of P.
inline constexpr double kAttitudeMarginalLimit = std::numbers::pi * std::numbers::pi;
inline constexpr double kAttitudeMarginalSoftLimit = kAttitudeMarginalLimit / 4.0;

/// Set of states whose chart coordinates x about `center` satisfy x^T P^{-1} x <= 1.
class UncertaintyEllipsoid {
 public:
  /// Requires P symmetric positive definite with attitude marginal below pi^2.
  UncertaintyEllipsoid(const AttitudeState& center, const Mat6& P)
      : center_(center), P_(P) {
    check_common();
    const double min_ev = Eigen::SelfAdjointEigenSolver<Mat6>(P_).eigenvalues()[0];
    llt_.compute(P_);
    if (!(min_ev > 0.0) || llt_.info() != Eigen::Success) {
      throw InvalidArgument("uncertainty matrix is not positive definite (min "
                            "eigenvalue " + std::to_string(min_ev) + ")");
    }
  }

  /// Positive semidefinite P allowed, e.g. a zero-uncertainty ellipsoid.
  [[nodiscard]] static UncertaintyEllipsoid degenerate(
      const AttitudeState& center, const Mat6& P) {
    return UncertaintyEllipsoid(center, P, DegenerateTag{});
  }

  [[nodiscard]] const AttitudeState& center() const noexcept { return center_; }
  [[nodiscard]] const Mat6& P() const noexcept { return P_; }
  [[nodiscard]] bool is_degenerate() const noexcept { return degenerate_; }

  [[nodiscard]] double attitude_marginal() const {
    return Eigen::SelfAdjointEigenSolver<Mat3>(P_.topLeftCorner<3, 3>())
        .eigenvalues()[2];
  }

  /// False when the attitude marginal exceeds (pi/2)^2; the chart is then strained.
  [[nodiscard]] bool within_soft_chart_limit() const {
    return attitude_marginal() < kAttitudeMarginalSoftLimit;
  }

  /// x^T P^{-1} x for a chart vector, via a Cholesky solve. For a degenerate P
  /// returns +inf when x leaves the range of P.
  [[nodiscard]] double quadratic_form(const Vec6& x) const {
    if (!degenerate_) return x.dot(llt_.solve(x));
    const Eigen::SelfAdjointEigenSolver<Mat6> es(P_);
    const double floor = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    double q = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double proj = es.eigenvectors().col(i).dot(x);
      const double lambda = es.eigenvalues()[i];
      if (lambda > floor) {
        q += proj * proj / lambda;
      } else if (std::abs(proj) > 1e-15) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return q;
  }

  /// Throws NearAntipodal when the state cannot be charted about the center.
  [[nodiscard]] double quadratic_form(const AttitudeState& s) const {
    return quadratic_form(chart(center_, s));
  }

 private:
  struct DegenerateTag {};

  UncertaintyEllipsoid(const AttitudeState& center, const Mat6& P, DegenerateTag)
      : center_(center), P_(P), degenerate_(true) {
    check_common();
    const double min_ev = Eigen::SelfAdjointEigenSolver<Mat6>(P_).eigenvalues()[0];
    if (min_ev < -1e-14 * std::max(1.0, P_.norm())) {
      throw InvalidArgument("uncertainty matrix is not positive semidefinite");
    }
  }

  void check_common() const {
    if (!P_.allFinite()) throw InvalidArgument("uncertainty matrix has non-finite entries");
    if ((P_ - P_.transpose()).norm() > 1e-12 * P_.norm()) {
      throw InvalidArgument("uncertainty matrix is not symmetric");
    }
    const double marginal = attitude_marginal();
    if (!(marginal < kAttitudeMarginalLimit)) {
      throw ChartBreakdown("attitude marginal " + std::to_string(marginal) +
                           " rad^2 exceeds pi^2; exponential chart breaks down");
    }
  }

  AttitudeState center_;
  Mat6 P_;
  Eigen::LLT<Mat6> llt_;
  bool degenerate_ = false;
};

struct ContainmentTest {
  bool contained = false;
  bool antipodal = false;  // state could not be charted about the center
  double form = std::numeric_limits<double>::infinity();
};

[[nodiscard]] inline ContainmentTest test_containment(const UncertaintyEllipsoid& e,
                                                      const AttitudeState& s,
                                                      double level) {
  if (!(level > 0.0)) throw InvalidArgument("containment level must be > 0");
  ContainmentTest out;
  try {
    out.form = e.quadratic_form(s);
  } catch (const NearAntipodal&) {
    out.antipodal = true;
    return out;
  }
  out.contained = out.form <= level;
  return out;
}

/// x^T P^{-1} x <= level for x = chart(center, s). A state a half-turn away is outside.
[[nodiscard]] inline bool contains(const UncertaintyEllipsoid& e,
                                   const AttitudeState& s, double level = 1.0) {
  return test_containment(e, s, level).contained;
}

/// Frobenius norm of P.
[[nodiscard]] inline double magnitude(const UncertaintyEllipsoid& e) {
  return e.P().norm();
}

/// Principal axes of P, eigenvalues descending, each eigenvector signed so that
/// its largest-magnitude component is positive.
struct PrincipalAxes {
  Vec6 values;
  Mat6 vectors;
};

[[nodiscard]] inline PrincipalAxes principal_axes(const Mat6& P) {
  const Eigen::SelfAdjointEigenSolver<Mat6> es(P);
  PrincipalAxes out;
  for (int i = 0; i < 6; ++i) {
    out.values[i] = std::max(0.0, es.eigenvalues()[5 - i]);
    Vec6 v = es.eigenvectors().col(5 - i);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    out.vectors.col(i) = v;
  }
  return out;
}

/// The 12 intersections of the boundary with the principal axes, ordered
/// (+axis 1, -axis 1, +axis 2, -axis 2, ...) with axes by decreasing eigenvalue.
[[nodiscard]] inline std::array<AttitudeState, 12> sigma_points(
    const UncertaintyEllipsoid& e) {
  const PrincipalAxes axes = principal_axes(e.P());
  std::array<AttitudeState, 12> out;
  for (int i = 0; i < 6; ++i) {
    const Vec6 x = std::sqrt(axes.values[i]) * axes.vectors.col(i);
    out[2 * i] = unchart(e.center(), x);
    out[2 * i + 1] = unchart(e.center(), -x);
  }
  return out;
}

/// n states on the level set x^T P^{-1} x = level, directions uniform in
/// whitened coordinates; deterministic in `seed`.
[[nodiscard]] inline std::vector<AttitudeState> sample_level_set(
    const UncertaintyEllipsoid& e, double level, std::size_t n,
    std::uint64_t seed) {
  if (!(level > 0.0 && level <= 1.0)) {
    throw InvalidArgument("sample_level_set: level must lie in (0, 1]");
  }
  if (n < 1) throw InvalidArgument("sample_level_set: n must be >= 1");
  const Eigen::LLT<Mat6> llt(e.P());
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("sample_level_set: P must be positive definite");
  }
  const Mat6 L = llt.matrixL();
  const CounterRng rng(seed);
  std::vector<AttitudeState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec6 x = std::sqrt(level) * (L * rng.unit_sphere<6>(i));
    out.push_back(unchart(e.center(), x));
  }
  return out;
}

/// Enclosing uncertainty ellipsoid of a set of states.
///
/// Charts the states about `center`, fits the minimum-volume ellipsoid, moves
/// the center to the fitted one and repeats the fit once in the new chart. If
/// chart distortion leaves a state outside level 1 + 10 tol, P is scaled up
/// to enclose it.
[[nodiscard]] inline UncertaintyEllipsoid fit_uncertainty(
    const AttitudeState& center, std::span<const AttitudeState> states,
    double tol = mvee_detail::kDefaultTol) {
  if (states.size() < 7) {
    throw InvalidArgument("fit_uncertainty: need at least 7 states");
  }
  std::vector<Vec6> xs(states.size());
  const auto chart_all = [&](const AttitudeState& about) {
    for (std::size_t i = 0; i < states.size(); ++i) xs[i] = chart(about, states[i]);
  };

  chart_all(center);
  const Ellipsoid6 first = mvee<6>(xs, tol);
  const AttitudeState moved = unchart(center, first.c);

  chart_all(moved);
  const Ellipsoid6 second = mvee<6>(xs, tol);
  const AttitudeState fitted_center = unchart(moved, second.c);

  Mat6 P = second.E;
  const Eigen::LLT<Mat6> llt(P);
  double worst = 0.0;
  for (const auto& s : states) {
    const Vec6 x = chart(fitted_center, s);
    worst = std::max(worst, x.dot(llt.solve(x)));
  }
  if (worst > 1.0 + 10.0 * tol) P *= worst;
  return UncertaintyEllipsoid(fitted_center, P);
}

[[nodiscard]] inline UncertaintyEllipsoid fit_uncertainty(
    const AttitudeState& center, const std::vector<AttitudeState>& states,
    double tol = mvee_detail::kDefaultTol) {
  return fit_uncertainty(center, std::span<const AttitudeState>(states), tol);
}

}  // namespace attprop
