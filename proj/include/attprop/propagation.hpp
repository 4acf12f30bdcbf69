#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attprop/ellipsoid.hpp"
#include "attprop/errors.hpp"
#include "attprop/lgvi.hpp"
#include "attprop/pendulum.hpp"
#include "attprop/so3.hpp"

namespace attprop {

enum class Method { linearized, unscented, unscented_resampled };

[[nodiscard]] constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::linearized: return "linearized";
    case Method::unscented: return "unscented";
    case Method::unscented_resampled: return "unscented_resampled";
  }
  return "unknown";
}

[[nodiscard]] inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::linearized, Method::unscented,
                   Method::unscented_resampled}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

namespace detail {

// Integer n with a == n * b up to relative 1e-9, if any.
inline std::optional<std::size_t> integer_ratio(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
  const double r = std::round(a / b);
  if (r < 1.0 || std::abs(a - r * b) > 1e-9 * a) return std::nullopt;
  return static_cast<std::size_t>(r);
}

}  // namespace detail

/// Time grid shared by the three propagation methods.
struct PropagationSchedule {
  double T = 10.0;                 // horizon [s]
  double h = 0.005;                // integrator step [s]
  double mvee_interval = 0.1;      // checkpoint spacing [s]
  double resample_interval = 2.0;  // re-sampling cadence [s]
  double mvee_tol = mvee_detail::kDefaultTol;

  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(h > 0.0)) out.emplace_back("schedule.h: must be > 0");
    if (!(T > 0.0)) out.emplace_back("schedule.T: must be > 0");
    if (!(mvee_interval > 0.0)) out.emplace_back("schedule.mvee_interval: must be > 0");
    if (!(resample_interval > 0.0)) {
      out.emplace_back("schedule.resample_interval: must be > 0");
    }
    if (!out.empty()) return out;
    if (!detail::integer_ratio(mvee_interval, h)) {
      out.emplace_back("schedule.mvee_interval: not a positive integer multiple of h");
    }
    if (!detail::integer_ratio(resample_interval, h)) {
      out.emplace_back("schedule.resample_interval: not a positive integer multiple of h");
    }
    if (!detail::integer_ratio(resample_interval, mvee_interval)) {
      out.emplace_back(
          "schedule.resample_interval: not an integer multiple of mvee_interval");
    }
    if (!detail::integer_ratio(T, mvee_interval)) {
      out.emplace_back("schedule.T: not an integer multiple of mvee_interval");
    }
    if (!(mvee_tol > 0.0 && mvee_tol <= 1e-3)) {
      out.emplace_back("schedule.mvee_tol: must lie in (0, 1e-3]");
    }
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) {
      std::string msg = "invalid propagation schedule:";
      for (const auto& s : v) msg += "\n  " + s;
      throw InvalidArgument(msg);
    }
  }

  [[nodiscard]] std::size_t steps_per_checkpoint() const {
    return *detail::integer_ratio(mvee_interval, h);
  }
  [[nodiscard]] std::size_t checkpoint_count() const {  // excluding t = 0
    return *detail::integer_ratio(T, mvee_interval);
  }
  [[nodiscard]] std::size_t checkpoints_per_resample() const {
    return *detail::integer_ratio(resample_interval, mvee_interval);
  }
  [[nodiscard]] double checkpoint_time(std::size_t i) const {
    return static_cast<double>(i * steps_per_checkpoint()) * h;
  }
};

/// LGVI-propagated reference states, sampled at every checkpoint.
struct BaselineSet {
  std::vector<double> times;
  std::vector<std::vector<AttitudeState>> states;  // [checkpoint][point]
};

struct Checkpoint {
  double t;
  UncertaintyEllipsoid ellipsoid;
  double magnitude;
  double containment;
};

struct PropagationRecord {
  Method method = Method::linearized;
  std::vector<Checkpoint> checkpoints;
  double mean_containment = 0.0;
  double wall_time = 0.0;  // [s]
  bool truncated = false;
  std::string truncation_reason;
};

/// Fraction of states inside e at level 1; states a half-turn away count as outside.
[[nodiscard]] inline double containment_fraction(
    const UncertaintyEllipsoid& e, std::span<const AttitudeState> states) {
  if (states.empty()) {
    throw InvalidArgument("containment_fraction: empty state set");
  }
  std::size_t inside = 0;
  for (const auto& s : states) inside += contains(e, s, 1.0) ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(states.size());
}

[[nodiscard]] inline double containment_fraction(
    const UncertaintyEllipsoid& e, const std::vector<AttitudeState>& states) {
  return containment_fraction(e, std::span<const AttitudeState>(states));
}

/// Samples `count` states on the `level` set of e0 and integrates each to every checkpoint.
[[nodiscard]] inline BaselineSet make_baseline(const RigidBodyParams& p,
                                               const LgviConfig& cfg,
                                               const PropagationSchedule& schedule,
                                               const UncertaintyEllipsoid& e0,
                                               std::size_t count, double level,
                                               std::uint64_t seed) {
  schedule.validate();
  BaselineSet out;
  const std::size_t n_cp = schedule.checkpoint_count();
  const std::size_t spc = schedule.steps_per_checkpoint();
  out.times.resize(n_cp + 1);
  for (std::size_t i = 0; i <= n_cp; ++i) out.times[i] = schedule.checkpoint_time(i);
  out.states.assign(n_cp + 1, {});
  out.states[0] = sample_level_set(e0, level, count, seed);
  for (std::size_t i = 1; i <= n_cp; ++i) {
    out.states[i] = out.states[i - 1];
    for (auto& s : out.states[i]) lgvi::advance(p, cfg, s, spc, (i - 1) * spc);
  }
  return out;
}

/// Central-difference Jacobian of one integrator step, expressed in the charts
/// about the current center and about its image.
[[nodiscard]] inline Mat6 flow_jacobian(const RigidBodyParams& p,
                                        const LgviConfig& cfg,
                                        const AttitudeState& center) {
  constexpr double delta = 1e-6;
  const AttitudeState image = lgvi::step(p, cfg, center);
  Mat6 A;
  for (int j = 0; j < 6; ++j) {
    const Vec6 dx = delta * Vec6::Unit(j);
    const AttitudeState plus = lgvi::step(p, cfg, unchart(center, dx));
    const AttitudeState minus = lgvi::step(p, cfg, unchart(center, -dx));
    A.col(j) = (chart(image, plus) - chart(image, minus)) / (2.0 * delta);
  }
  return A;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void check_inputs(const PropagationSchedule& schedule,
                         const BaselineSet& baseline) {
  schedule.validate();
  if (baseline.states.size() != schedule.checkpoint_count() + 1) {
    throw InvalidArgument("baseline does not match the schedule's checkpoints");
  }
  for (const auto& set : baseline.states) {
    if (set.empty()) throw InvalidArgument("baseline is empty");
  }
}

inline void push_checkpoint(PropagationRecord& rec, double t,
                            UncertaintyEllipsoid e,
                            const std::vector<AttitudeState>& baseline) {
  const double mag = magnitude(e);
  const double frac = containment_fraction(e, baseline);
  rec.checkpoints.push_back(Checkpoint{t, std::move(e), mag, frac});
}

inline void finish(PropagationRecord& rec, const Stopwatch& clock) {
  double sum = 0.0;
  for (const auto& c : rec.checkpoints) sum += c.containment;
  rec.mean_containment =
      rec.checkpoints.empty() ? 0.0 : sum / static_cast<double>(rec.checkpoints.size());
  rec.wall_time = clock.seconds();
}

// Shared body of both unscented variants. `resample_every` is counted in
// checkpoints; zero disables re-sampling.
inline PropagationRecord propagate_sigma_points(
    Method method, const RigidBodyParams& p, const LgviConfig& cfg,
    const PropagationSchedule& schedule, const UncertaintyEllipsoid& e0,
    const BaselineSet& baseline, std::size_t resample_every) {
  check_inputs(schedule, baseline);
  const Stopwatch clock;
  PropagationRecord rec;
  rec.method = method;

  const std::size_t n_cp = schedule.checkpoint_count();
  const std::size_t spc = schedule.steps_per_checkpoint();
  AttitudeState center = e0.center();
  const auto initial = sigma_points(e0);
  std::vector<AttitudeState> points(initial.begin(), initial.end());

  for (std::size_t i = 0; i <= n_cp; ++i) {
    if (i > 0) {
      const std::size_t first = (i - 1) * spc;
      lgvi::advance(p, cfg, center, spc, first);
      for (auto& s : points) lgvi::advance(p, cfg, s, spc, first);
    }
    std::optional<UncertaintyEllipsoid> fitted;
    try {
      fitted.emplace(fit_uncertainty(center, points, schedule.mvee_tol));
    } catch (const ChartBreakdown& e) {
      rec.truncated = true;
      rec.truncation_reason = e.what();
    } catch (const NearAntipodal& e) {
      rec.truncated = true;
      rec.truncation_reason = std::string("sigma point left the chart: ") + e.what();
    }
    if (!fitted) break;
    const bool resample =
        resample_every > 0 && i > 0 && i < n_cp && i % resample_every == 0;
    if (resample) {
      const auto fresh = sigma_points(*fitted);
      points.assign(fresh.begin(), fresh.end());
      center = fitted->center();
    }
    push_checkpoint(rec, schedule.checkpoint_time(i), std::move(*fitted),
                    baseline.states[i]);
  }
  finish(rec, clock);
  return rec;
}

}  // namespace detail

/// Propagates the center with the integrator and P by P <- A P A^T at every
/// step, with A the one-step flow Jacobian at the current center.
[[nodiscard]] inline PropagationRecord propagate_linearized(
    const RigidBodyParams& p, const LgviConfig& cfg,
    const PropagationSchedule& schedule, const UncertaintyEllipsoid& e0,
    const BaselineSet& baseline) {
  detail::check_inputs(schedule, baseline);
  const detail::Stopwatch clock;
  PropagationRecord rec;
  rec.method = Method::linearized;

  const std::size_t n_cp = schedule.checkpoint_count();
  const std::size_t spc = schedule.steps_per_checkpoint();
  AttitudeState center = e0.center();
  Mat6 P = e0.P();

  detail::push_checkpoint(rec, 0.0, e0, baseline.states[0]);
  for (std::size_t i = 1; i <= n_cp; ++i) {
    for (std::size_t k = 0; k < spc; ++k) {
      const std::size_t index = (i - 1) * spc + k;
      try {
        const Mat6 A = flow_jacobian(p, cfg, center);
        P = A * P * A.transpose();
        P = 0.5 * (P + P.transpose()).eval();
        center = lgvi::step(p, cfg, center);
      } catch (const NewtonDiverged& e) {
        throw NewtonDiverged(e.residual(), index);
      }
    }
    try {
      UncertaintyEllipsoid e = e0.is_degenerate()
                                   ? UncertaintyEllipsoid::degenerate(center, P)
                                   : UncertaintyEllipsoid(center, P);
      detail::push_checkpoint(rec, schedule.checkpoint_time(i), std::move(e),
                              baseline.states[i]);
    } catch (const ChartBreakdown& e) {
      rec.truncated = true;
      rec.truncation_reason = e.what();
      break;
    }
  }
  detail::finish(rec, clock);
  return rec;
}

/// Propagates the 12 sigma points of e0 over the whole horizon and fits the
/// enclosing ellipsoid at every checkpoint.
[[nodiscard]] inline PropagationRecord propagate_unscented(
    const RigidBodyParams& p, const LgviConfig& cfg,
    const PropagationSchedule& schedule, const UncertaintyEllipsoid& e0,
    const BaselineSet& baseline) {
  return detail::propagate_sigma_points(Method::unscented, p, cfg, schedule, e0,
                                        baseline, 0);
}

/// As propagate_unscented, but at every resample_interval boundary the fitted
/// ellipsoid's own sigma points replace the propagated set.
[[nodiscard]] inline PropagationRecord propagate_unscented_resampled(
    const RigidBodyParams& p, const LgviConfig& cfg,
    const PropagationSchedule& schedule, const UncertaintyEllipsoid& e0,
    const BaselineSet& baseline) {
  schedule.validate();
  return detail::propagate_sigma_points(Method::unscented_resampled, p, cfg,
                                        schedule, e0, baseline,
                                        schedule.checkpoints_per_resample());
}

[[nodiscard]] inline PropagationRecord propagate(
    Method m, const RigidBodyParams& p, const LgviConfig& cfg,
    const PropagationSchedule& schedule, const UncertaintyEllipsoid& e0,
    const BaselineSet& baseline) {
  switch (m) {
    case Method::linearized:
      return propagate_linearized(p, cfg, schedule, e0, baseline);
    case Method::unscented:
      return propagate_unscented(p, cfg, schedule, e0, baseline);
    case Method::unscented_resampled:
      return propagate_unscented_resampled(p, cfg, schedule, e0, baseline);
  }
  throw InvalidArgument("unknown propagation method");
}

}  // namespace attprop
