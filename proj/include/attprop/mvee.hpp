#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attprop/errors.hpp"

namespace attprop {

/// Ellipsoid {y : (y - c)^T E^{-1} (y - c) <= 1} in R^Dim.
template <int Dim>
struct EnclosingEllipsoid {
  using Vector = Eigen::Matrix<double, Dim, 1>;
  using Matrix = Eigen::Matrix<double, Dim, Dim>;

  Vector c = Vector::Zero();
  Matrix E = Matrix::Identity();

  // Solver diagnostics.
  int iterations = 0;
  double gap = 0.0;          // max(eps_plus, eps_minus) at termination
  bool regularized = false;  // ridge was added to E

  [[nodiscard]] double quadratic_form(const Vector& y) const {
    const Vector d = y - c;
    return d.dot(E.llt().solve(d));
  }

  /// log det E; volume up to the unit-ball constant.
  [[nodiscard]] double log_det() const {
    return 2.0 * E.llt().matrixLLT().diagonal().array().log().sum();
  }
};

using Ellipsoid6 = EnclosingEllipsoid<6>;

namespace mvee_detail {

inline constexpr double kDefaultTol = 1e-7;
inline constexpr int kMaxIterations = 100000;
/// Singular-value ratio of the centered data below which the set is flat.
inline constexpr double kFlatRatio = 1e-13;
/// Condition number of E above which a ridge is added.
inline constexpr double kMaxCondition = 1e12;
inline constexpr double kRidge = 1e-12;

}  // namespace mvee_detail

/// Minimum-volume enclosing ellipsoid of a point set.
///
/// Khachiyan's barycentric coordinate ascent on the lifted points [y; 1],
/// with Todd-Yildirim away steps so that interior points lose their weight at
/// a linear rate. The iteration runs on whitened data (the points mapped
/// through the inverse square root of their scatter), which leaves the
/// optimum unchanged by affine equivariance and keeps thin point clouds well
/// conditioned. Terminates when both the outward gap
/// max_i M_i/(d+1) - 1 and the inward gap 1 - min_{u_i>0} M_i/(d+1) are <= tol;
/// every input then satisfies the containment form <= 1 + tol (d+1)/d.
///
/// Throws Degenerate when the affine span has dimension < Dim and
/// MaxIterations after 1e5 iterations.
template <int Dim>
[[nodiscard]] EnclosingEllipsoid<Dim> mvee(
    std::span<const Eigen::Matrix<double, Dim, 1>> points,
    double tol = mvee_detail::kDefaultTol) {
  using Vector = Eigen::Matrix<double, Dim, 1>;
  using Matrix = Eigen::Matrix<double, Dim, Dim>;
  using LiftedMatrix = Eigen::Matrix<double, Dim + 1, Dim + 1>;
  constexpr double d = Dim;

  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < Dim + 1) {
    throw Degenerate("mvee: need at least " + std::to_string(Dim + 1) +
                     " points, got " + std::to_string(n));
  }
  if (!(tol > 0.0 && tol <= 1e-3)) {
    throw InvalidArgument("mvee: tol must lie in (0, 1e-3]");
  }

  Vector mean = Vector::Zero();
  for (const auto& y : points) mean += y;
  mean /= static_cast<double>(n);
  Eigen::Matrix<double, Dim, Eigen::Dynamic> centered(Dim, n);
  for (Eigen::Index i = 0; i < n; ++i) centered.col(i) = points[i] - mean;

  Eigen::JacobiSVD<Eigen::Matrix<double, Dim, Eigen::Dynamic>> svd(
      centered, Eigen::ComputeFullU);
  const Vector sigma = svd.singularValues();
  if (!(sigma[0] > 0.0) || sigma[Dim - 1] < mvee_detail::kFlatRatio * sigma[0]) {
    throw Degenerate("mvee: points do not affinely span R^" +
                     std::to_string(Dim) + " (singular value ratio " +
                     std::to_string(sigma[0] > 0.0 ? sigma[Dim - 1] / sigma[0]
                                                   : 0.0) +
                     ")");
  }
  const Matrix unwhiten = svd.matrixU() * sigma.asDiagonal();
  const Matrix whiten = sigma.cwiseInverse().asDiagonal() *
                        svd.matrixU().transpose();

  Eigen::Matrix<double, Dim + 1, Eigen::Dynamic> q(Dim + 1, n);
  q.topRows(Dim) = whiten * centered;
  q.row(Dim).setOnes();

  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd M(n);
  EnclosingEllipsoid<Dim> out;

  int iter = 0;
  for (;; ++iter) {
    const LiftedMatrix X = q * u.asDiagonal() * q.transpose();
    const Eigen::LLT<LiftedMatrix> llt(X);
    if (llt.info() != Eigen::Success) {
      throw Degenerate("mvee: lifted scatter matrix lost definiteness");
    }
    M = (q.array() * llt.solve(q).array()).colwise().sum().transpose();

    Eigen::Index j = 0;
    const double m_max = M.maxCoeff(&j);
    Eigen::Index k = -1;
    double m_min = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (u[i] > 0.0 && (k < 0 || M[i] < m_min)) {
        k = i;
        m_min = M[i];
      }
    }
    const double eps_plus = m_max / (d + 1.0) - 1.0;
    const double eps_minus = 1.0 - m_min / (d + 1.0);
    out.gap = std::max(eps_plus, eps_minus);
    if (eps_plus <= tol && eps_minus <= tol) break;
    if (iter >= mvee_detail::kMaxIterations) {
      throw MaxIterations("mvee: no convergence in " +
                          std::to_string(mvee_detail::kMaxIterations) +
                          " iterations (gap " + std::to_string(out.gap) + ")");
    }

    if (eps_plus >= eps_minus) {
      const double step = (m_max - d - 1.0) / ((d + 1.0) * (m_max - 1.0));
      u *= 1.0 - step;
      u[j] += step;
    } else {
      // Away step: shrink the weight of the deepest interior support point.
      const double bound = -u[k] / (1.0 - u[k]);
      double step = bound;
      if (m_min - 1.0 > 0.0) {
        step = std::max(bound, (m_min - d - 1.0) / ((d + 1.0) * (m_min - 1.0)));
      }
      u *= 1.0 - step;
      u[k] += step;
      if (step == bound) u[k] = 0.0;
    }
  }
  out.iterations = iter;

  const Vector cz = q.topRows(Dim) * u;
  Matrix scatter = q.topRows(Dim) * u.asDiagonal() * q.topRows(Dim).transpose() -
                   cz * cz.transpose();
  Matrix E = d * (unwhiten * scatter * unwhiten.transpose());
  E = 0.5 * (E + E.transpose()).eval();
  out.c = mean + unwhiten * cz;

  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(E).eigenvalues();
  if (!(ev[0] > 0.0) || ev[Dim - 1] > mvee_detail::kMaxCondition * ev[0]) {
    E += (mvee_detail::kRidge * E.trace() / d) * Matrix::Identity();
    out.regularized = true;
  }
  out.E = E;
  return out;
}

template <int Dim>
[[nodiscard]] EnclosingEllipsoid<Dim> mvee(
    const std::vector<Eigen::Matrix<double, Dim, 1>>& points,
    double tol = mvee_detail::kDefaultTol) {
  return mvee<Dim>(std::span<const Eigen::Matrix<double, Dim, 1>>(points), tol);
}

}  // namespace attprop
