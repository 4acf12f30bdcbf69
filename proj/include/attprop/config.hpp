#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "attprop/ellipsoid.hpp"
#include "attprop/errors.hpp"
#include "attprop/lgvi.hpp"
#include "attprop/pendulum.hpp"
#include "attprop/propagation.hpp"
#include "attprop/so3.hpp"

namespace attprop {

/// One experiment: body, initial uncertainty ellipsoid, schedule, baseline and outputs.
struct RunConfig {
  RigidBodyParams body;
  AttitudeState initial;
  Mat6 P0 = Mat6::Zero();
  PropagationSchedule schedule;
  double newton_tol = 1e-14;
  int newton_max_iter = 50;
  std::size_t baseline_count = 144;
  double baseline_level = 0.8;
  std::uint64_t seed = 1;
  std::vector<Method> methods;
  std::filesystem::path output_dir = "out";

  [[nodiscard]] LgviConfig lgvi() const {
    return LgviConfig{schedule.h, newton_tol, newton_max_iter};
  }

  [[nodiscard]] UncertaintyEllipsoid initial_ellipsoid() const {
    return UncertaintyEllipsoid(initial, P0);
  }

  /// Canonical form of the effective configuration; every number is written
  /// with round-trip precision.
  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    const auto mat = [](const auto& m) {
      std::vector<double> v;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
      return v;
    };
    j["body"]["J"] = mat(body.J);
    j["body"]["m"] = body.m;
    j["body"]["g"] = body.g;
    j["body"]["rho"] = mat(body.rho);
    j["initial"]["R0"] = mat(initial.R.matrix());
    j["initial"]["Omega0"] = mat(initial.Omega);
    j["initial"]["P0"] = mat(P0);
    j["schedule"]["h"] = schedule.h;
    j["schedule"]["T"] = schedule.T;
    j["schedule"]["mvee_interval"] = schedule.mvee_interval;
    j["schedule"]["resample_interval"] = schedule.resample_interval;
    j["schedule"]["mvee_tol"] = schedule.mvee_tol;
    j["integrator"]["newton_tol"] = newton_tol;
    j["integrator"]["newton_max_iter"] = newton_max_iter;
    j["baseline"]["count"] = baseline_count;
    j["baseline"]["level"] = baseline_level;
    j["baseline"]["seed"] = seed;
    std::vector<std::string> names;
    for (Method m : methods) names.emplace_back(to_string(m));
    j["methods"] = names;
    j["output_dir"] = output_dir.generic_string();
    return j;
  }
};

/// FNV-1a 64-bit hash of the canonical configuration, as 16 hex digits.
[[nodiscard]] inline std::string config_hash(const RunConfig& cfg) {
  const std::string text = cfg.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace config_detail {

using json = nlohmann::json;

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void fail(const std::string& field, const std::string& reason) {
    errors_.push_back(field + ": " + reason);
  }

  const json* find(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  bool number(const json& obj, const std::string& key, const std::string& field,
              double& out, bool required) {
    const json* v = find(obj, key);
    if (v == nullptr) {
      if (required) fail(field, "missing");
      return false;
    }
    if (!v->is_number()) {
      fail(field, "must be a number");
      return false;
    }
    out = v->get<double>();
    if (!std::isfinite(out)) {
      fail(field, "must be finite");
      return false;
    }
    return true;
  }

  bool integer(const json& obj, const std::string& key, const std::string& field,
               std::int64_t& out) {
    const json* v = find(obj, key);
    if (v == nullptr) return false;
    if (!v->is_number_integer()) {
      fail(field, "must be an integer");
      return false;
    }
    out = v->get<std::int64_t>();
    return true;
  }

  bool numbers(const json& obj, const std::string& key, const std::string& field,
               std::vector<double>& out) {
    const json* v = find(obj, key);
    if (v == nullptr) return false;
    if (!v->is_array()) {
      fail(field, "must be an array of numbers");
      return false;
    }
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        fail(field, "must be an array of finite numbers");
        return false;
      }
      out.push_back(e.get<double>());
    }
    return true;
  }

 private:
  std::vector<std::string>& errors_;
};

inline const json& section(const json& root, const std::string& key) {
  static const json empty = json::object();
  const auto it = root.find(key);
  return it != root.end() && it->is_object() ? *it : empty;
}

}  // namespace config_detail

/// Builds a RunConfig from parsed JSON. Throws ConfigError listing every
/// violated field and reason.
///
///   body:      J (3 diagonal or 9 row-major), m, g (default 9.81), rho (3)
///   initial:   R0 (9 row-major) or R0_axis_angle (3), Omega0 (3),
///              P0_diag (6) or P0 (36 row-major)
///   schedule:  h, T, mvee_interval, resample_interval, mvee_tol (optional)
///   baseline:  count (144), level (0.8), seed (1)
///   integrator (optional): newton_tol, newton_max_iter
///   methods:   non-empty subset of linearized, unscented, unscented_resampled
///   output_dir
[[nodiscard]] inline RunConfig parse_config(const nlohmann::json& root) {
  using config_detail::section;
  std::vector<std::string> errors;
  config_detail::Reader rd(errors);
  RunConfig cfg;

  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  const auto& body = section(root, "body");
  std::vector<double> v;
  if (rd.numbers(body, "J", "body.J", v)) {
    if (v.size() == 3) {
      cfg.body.J = Vec3(v[0], v[1], v[2]).asDiagonal();
    } else if (v.size() == 9) {
      cfg.body.J = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
    } else {
      rd.fail("body.J", "expected 3 (diagonal) or 9 (row-major) numbers");
    }
  } else if (rd.find(body, "J") == nullptr) {
    rd.fail("body.J", "missing");
  }
  rd.number(body, "m", "body.m", cfg.body.m, true);
  cfg.body.g = 9.81;
  rd.number(body, "g", "body.g", cfg.body.g, false);
  if (rd.numbers(body, "rho", "body.rho", v)) {
    if (v.size() == 3) cfg.body.rho = Vec3(v[0], v[1], v[2]);
    else rd.fail("body.rho", "expected 3 numbers");
  } else if (rd.find(body, "rho") == nullptr) {
    rd.fail("body.rho", "missing");
  }
  const bool body_read = errors.empty();
  if (body_read) {
    for (const auto& s : cfg.body.violations()) errors.push_back(s);
  }

  const auto& init = section(root, "initial");
  if (rd.numbers(init, "R0", "initial.R0", v)) {
    if (v.size() != 9) {
      rd.fail("initial.R0", "expected 9 row-major numbers");
    } else {
      try {
        cfg.initial.R = Rotation::from_matrix(
            Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data()));
      } catch (const InvalidArgument& e) {
        rd.fail("initial.R0", e.what());
      }
    }
  } else if (rd.numbers(init, "R0_axis_angle", "initial.R0_axis_angle", v)) {
    if (v.size() != 3) rd.fail("initial.R0_axis_angle", "expected 3 numbers");
    else cfg.initial.R = so3::exp(Vec3(v[0], v[1], v[2]));
  }
  if (rd.numbers(init, "Omega0", "initial.Omega0", v)) {
    if (v.size() == 3) cfg.initial.Omega = Vec3(v[0], v[1], v[2]);
    else rd.fail("initial.Omega0", "expected 3 numbers");
  } else if (rd.find(init, "Omega0") == nullptr) {
    rd.fail("initial.Omega0", "missing");
  }
  if (rd.numbers(init, "P0_diag", "initial.P0_diag", v)) {
    if (v.size() == 6) cfg.P0 = Eigen::Map<const Vec6>(v.data()).asDiagonal();
    else rd.fail("initial.P0_diag", "expected 6 numbers");
  } else if (rd.numbers(init, "P0", "initial.P0", v)) {
    if (v.size() == 36) {
      cfg.P0 = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(v.data());
    } else {
      rd.fail("initial.P0", "expected 36 row-major numbers");
    }
  } else if (rd.find(init, "P0_diag") == nullptr && rd.find(init, "P0") == nullptr) {
    rd.fail("initial.P0_diag", "missing (or give initial.P0)");
  }

  const auto& sched = section(root, "schedule");
  const std::size_t before_schedule = errors.size();
  rd.number(sched, "h", "schedule.h", cfg.schedule.h, true);
  rd.number(sched, "T", "schedule.T", cfg.schedule.T, true);
  rd.number(sched, "mvee_interval", "schedule.mvee_interval", cfg.schedule.mvee_interval, true);
  rd.number(sched, "resample_interval", "schedule.resample_interval",
            cfg.schedule.resample_interval, true);
  rd.number(sched, "mvee_tol", "schedule.mvee_tol", cfg.schedule.mvee_tol, false);
  if (errors.size() == before_schedule) {
    for (const auto& s : cfg.schedule.violations()) errors.push_back(s);
  }

  const auto& integ = section(root, "integrator");
  rd.number(integ, "newton_tol", "integrator.newton_tol", cfg.newton_tol, false);
  std::int64_t iv = 0;
  if (rd.integer(integ, "newton_max_iter", "integrator.newton_max_iter", iv)) {
    cfg.newton_max_iter = static_cast<int>(iv);
  }
  if (!(cfg.newton_tol > 0.0 && cfg.newton_tol < 1e-6)) {
    rd.fail("integrator.newton_tol", "must lie in (0, 1e-6)");
  }
  if (cfg.newton_max_iter < 1) rd.fail("integrator.newton_max_iter", "must be >= 1");

  const auto& base = section(root, "baseline");
  if (rd.integer(base, "count", "baseline.count", iv)) {
    if (iv < 1) rd.fail("baseline.count", "must be >= 1");
    else cfg.baseline_count = static_cast<std::size_t>(iv);
  }
  rd.number(base, "level", "baseline.level", cfg.baseline_level, false);
  if (!(cfg.baseline_level > 0.0 && cfg.baseline_level <= 1.0)) {
    rd.fail("baseline.level", "must lie in (0, 1]");
  }
  if (rd.integer(base, "seed", "baseline.seed", iv)) {
    if (iv < 0) rd.fail("baseline.seed", "must be >= 0");
    else cfg.seed = static_cast<std::uint64_t>(iv);
  }

  const nlohmann::json* methods = rd.find(root, "methods");
  if (methods == nullptr || !methods->is_array()) {
    rd.fail("methods", "missing or not an array");
  } else {
    for (const auto& m : *methods) {
      const auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
      if (!parsed) {
        rd.fail("methods", "unknown method " + m.dump());
      } else if (std::find(cfg.methods.begin(), cfg.methods.end(), *parsed) ==
                 cfg.methods.end()) {
        cfg.methods.push_back(*parsed);
      }
    }
    if (methods->empty()) rd.fail("methods", "at least one method is required");
  }

  if (const nlohmann::json* out = rd.find(root, "output_dir")) {
    if (out->is_string()) cfg.output_dir = out->get<std::string>();
    else rd.fail("output_dir", "must be a string");
  }

  if (errors.empty()) {
    try {
      const UncertaintyEllipsoid e0 = cfg.initial_ellipsoid();
      (void)e0;
    } catch (const Error& e) {
      rd.fail("initial.P0", e.what());
    }
  }

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

[[nodiscard]] inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(root);
}

}  // namespace attprop
