#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "attprop/config.hpp"
#include "attprop/lgvi.hpp"
#include "attprop/pendulum.hpp"
#include "attprop/propagation.hpp"

namespace attprop {

/// Conservation diagnostics of a discrete trajectory.
struct IntegratorDiagnostics {
  double max_orthogonality_defect = 0.0;  // max_k |R_k^T R_k - I|_F
  double max_vertical_momentum_drift = 0.0;  // max_k |pi3_k - pi3_0|
  double max_energy_deviation = 0.0;  // max_k |E_k - E_0| / (|E_0| + 1)
  double energy_deviation_first_half = 0.0;
  double energy_deviation_second_half = 0.0;
};

[[nodiscard]] inline IntegratorDiagnostics diagnose(const RigidBodyParams& p,
                                                    const Trajectory& traj) {
  IntegratorDiagnostics d;
  if (traj.states.empty()) return d;
  const double e0 = energy(p, traj.states.front());
  const double pi0 = vertical_momentum(p, traj.states.front());
  const std::size_t n = traj.states.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = traj.states[k];
    d.max_orthogonality_defect =
        std::max(d.max_orthogonality_defect, s.R.orthogonality_defect());
    d.max_vertical_momentum_drift =
        std::max(d.max_vertical_momentum_drift, std::abs(vertical_momentum(p, s) - pi0));
    const double dev = std::abs(energy(p, s) - e0) / (std::abs(e0) + 1.0);
    d.max_energy_deviation = std::max(d.max_energy_deviation, dev);
    double& half = 2 * k < n ? d.energy_deviation_first_half
                             : d.energy_deviation_second_half;
    half = std::max(half, dev);
  }
  return d;
}

struct ExperimentResult {
  Trajectory center;  // integrator flow of the initial center, every step
  IntegratorDiagnostics diagnostics;
  BaselineSet baseline;
  std::vector<PropagationRecord> records;  // in config.methods order
};

using ProgressSink = std::function<void(const std::string&)>;

/// Runs every configured method on one scenario. The baseline trajectories
/// are computed once and shared by all records.
[[nodiscard]] inline ExperimentResult run_experiment(const RunConfig& cfg,
                                                     const ProgressSink& progress = {}) {
  const auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const LgviConfig lgvi_cfg = cfg.lgvi();
  lgvi_cfg.validate();
  cfg.body.validate();
  const UncertaintyEllipsoid e0 = cfg.initial_ellipsoid();

  ExperimentResult out;
  const std::size_t n_steps =
      cfg.schedule.checkpoint_count() * cfg.schedule.steps_per_checkpoint();
  say("integrating center trajectory (" + std::to_string(n_steps) + " steps)");
  out.center = lgvi::propagate(cfg.body, lgvi_cfg, cfg.initial, n_steps);
  out.diagnostics = diagnose(cfg.body, out.center);

  say("integrating " + std::to_string(cfg.baseline_count) + " baseline states");
  out.baseline = make_baseline(cfg.body, lgvi_cfg, cfg.schedule, e0,
                               cfg.baseline_count, cfg.baseline_level, cfg.seed);

  for (Method m : cfg.methods) {
    say("propagating: " + std::string(to_string(m)));
    out.records.push_back(propagate(m, cfg.body, lgvi_cfg, cfg.schedule, e0, out.baseline));
  }
  return out;
}

}  // namespace attprop
