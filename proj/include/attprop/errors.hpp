#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attprop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, non-positive step, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// vee() was handed a matrix whose symmetric part is not negligible.
class NotSkew : public Error {
 public:
  using Error::Error;
};

/// A relative rotation is too close to a half turn for the logarithm chart.
class NearAntipodal : public Error {
 public:
  explicit NearAntipodal(double angle)
      : Error("rotation angle " + std::to_string(angle) +
              " rad is within 1e-6 of pi; exponential chart is invalid"),
        angle_(angle) {}

  double angle() const noexcept { return angle_; }

 private:
  double angle_;
};

/// The implicit relative-attitude equation of the integrator did not converge.
class NewtonDiverged : public Error {
 public:
  NewtonDiverged(double residual, std::size_t step_index = 0)
      : Error(format(residual, step_index)),
        residual_(residual),
        step_index_(step_index) {}

  double residual() const noexcept { return residual_; }
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  static std::string format(double residual, std::size_t step_index) {
    return "Newton solve for the relative attitude diverged at step " +
           std::to_string(step_index) + " (last residual " +
           std::to_string(residual) + ")";
  }

  double residual_;
  std::size_t step_index_;
};

/// Point set does not affinely span the ambient space.
class Degenerate : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap before reaching tolerance.
class MaxIterations : public Error {
 public:
  using Error::Error;
};

/// An uncertainty ellipsoid became too large for the exponential chart.
class ChartBreakdown : public Error {
 public:
  using Error::Error;
};

/// Run configuration failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace attprop
