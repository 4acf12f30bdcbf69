#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "attprop/config.hpp"
#include "attprop/errors.hpp"
#include "attprop/experiment.hpp"
#include "attprop/pendulum.hpp"

namespace attprop {

namespace output_detail {

// Shortest decimal that round-trips to the same double.
inline void put(std::string& line, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  line.append(buf, res.ptr);
}

inline void put_row(std::string& line, const Mat3& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      line += ',';
      put(line, m(r, c));
    }
}

inline void put_vec(std::string& line, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    line += ',';
    put(line, v[i]);
  }
}

inline std::vector<std::string> prefixed(const std::string& p, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(p + std::to_string(i));
  return out;
}

inline std::vector<std::string> rotation_columns() {
  std::vector<std::string> out;
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) out.push_back("R" + std::to_string(r) + std::to_string(c));
  return out;
}

inline std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

inline void append(std::vector<std::string>& a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace output_detail

/// Column schemas of the CSV products.
[[nodiscard]] inline std::vector<std::string> trajectory_columns() {
  using namespace output_detail;
  std::vector<std::string> c{"t"};
  append(c, rotation_columns());
  append(c, prefixed("Omega", 3));
  append(c, prefixed("Gamma", 3));
  c.emplace_back("energy");
  c.emplace_back("vertical_momentum");
  return c;
}

[[nodiscard]] inline std::vector<std::string> checkpoint_columns() {
  using namespace output_detail;
  std::vector<std::string> c{"t"};
  append(c, rotation_columns());
  append(c, prefixed("Omega", 3));
  for (int r = 1; r <= 6; ++r)
    for (int k = r; k <= 6; ++k) c.push_back("P" + std::to_string(r) + std::to_string(k));
  c.emplace_back("magnitude");
  c.emplace_back("containment_fraction");
  return c;
}

[[nodiscard]] inline std::vector<std::string> baseline_columns() {
  using namespace output_detail;
  std::vector<std::string> c{"t", "index"};
  append(c, rotation_columns());
  append(c, prefixed("Omega", 3));
  return c;
}

[[nodiscard]] inline std::string trajectory_csv(const RigidBodyParams& p,
                                                const Trajectory& traj) {
  using namespace output_detail;
  std::string s = join(trajectory_columns()) + '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& st = traj.states[k];
    put(s, traj.times[k]);
    put_row(s, st.R.matrix());
    put_vec(s, st.Omega);
    put_vec(s, reduced_attitude(st));
    s += ',';
    put(s, energy(p, st));
    s += ',';
    put(s, vertical_momentum(p, st));
    s += '\n';
  }
  return s;
}

[[nodiscard]] inline std::string checkpoints_csv(const PropagationRecord& rec) {
  using namespace output_detail;
  std::string s = join(checkpoint_columns()) + '\n';
  for (const auto& cp : rec.checkpoints) {
    put(s, cp.t);
    put_row(s, cp.ellipsoid.center().R.matrix());
    put_vec(s, cp.ellipsoid.center().Omega);
    const Mat6& P = cp.ellipsoid.P();
    for (int r = 0; r < 6; ++r)
      for (int k = r; k < 6; ++k) {
        s += ',';
        put(s, P(r, k));
      }
    s += ',';
    put(s, cp.magnitude);
    s += ',';
    put(s, cp.containment);
    s += '\n';
  }
  return s;
}

[[nodiscard]] inline std::string baseline_csv(const BaselineSet& b) {
  using namespace output_detail;
  std::string s = join(baseline_columns()) + '\n';
  for (std::size_t i = 0; i < b.states.size(); ++i) {
    for (std::size_t j = 0; j < b.states[i].size(); ++j) {
      put(s, b.times[i]);
      s += ',' + std::to_string(j);
      put_row(s, b.states[i][j].R.matrix());
      put_vec(s, b.states[i][j].Omega);
      s += '\n';
    }
  }
  return s;
}

/// Deterministic run metadata: config echo, per-method means and integrator
/// diagnostics. Wall-clock times are kept out of it (see timing_json).
[[nodiscard]] inline nlohmann::ordered_json summary_json(const RunConfig& cfg,
                                                         const ExperimentResult& res) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["config"] = cfg.to_json();
  auto& methods = j["methods"];
  methods = nlohmann::ordered_json::object();
  for (const auto& rec : res.records) {
    auto& m = methods[std::string(to_string(rec.method))];
    m["file"] = std::string(to_string(rec.method)) + "_checkpoints.csv";
    m["mean_containment"] = rec.mean_containment;
    m["checkpoints"] = rec.checkpoints.size();
    m["truncated"] = rec.truncated;
    m["truncation_reason"] = rec.truncation_reason;
  }
  const auto& d = res.diagnostics;
  j["diagnostics"]["max_orthogonality_defect"] = d.max_orthogonality_defect;
  j["diagnostics"]["max_vertical_momentum_drift"] = d.max_vertical_momentum_drift;
  j["diagnostics"]["max_energy_deviation"] = d.max_energy_deviation;
  j["diagnostics"]["energy_deviation_first_half"] = d.energy_deviation_first_half;
  j["diagnostics"]["energy_deviation_second_half"] = d.energy_deviation_second_half;
  j["files"]["trajectory.csv"] = trajectory_columns();
  j["files"]["baseline.csv"] = baseline_columns();
  j["files"]["<method>_checkpoints.csv"] = checkpoint_columns();
  return j;
}

[[nodiscard]] inline nlohmann::ordered_json timing_json(const ExperimentResult& res) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& rec : res.records) {
    j[std::string(to_string(rec.method))]["wall_time_s"] = rec.wall_time;
  }
  return j;
}

/// Writes trajectory.csv, baseline.csv, <method>_checkpoints.csv, summary.json
/// and timing.json under `dir`, creating it if needed.
inline void write_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                          const ExperimentResult& res) {
  using output_detail::write_file;
  std::filesystem::create_directories(dir);
  write_file(dir / "trajectory.csv", trajectory_csv(cfg.body, res.center));
  write_file(dir / "baseline.csv", baseline_csv(res.baseline));
  for (const auto& rec : res.records) {
    write_file(dir / (std::string(to_string(rec.method)) + "_checkpoints.csv"),
               checkpoints_csv(rec));
  }
  write_file(dir / "summary.json", summary_json(cfg, res).dump(2) + '\n');
  write_file(dir / "timing.json", timing_json(res).dump(2) + '\n');
}

}  // namespace attprop
