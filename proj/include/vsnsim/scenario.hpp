#pragma once

// Scenario configuration: JSON ingestion with defaults, validation and the
// demand mapping from a saturation level (demand-capacity ratio) to the
// per-entry Bernoulli arrival probability.

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsnsim/collection.hpp"
#include "vsnsim/controller.hpp"
#include "vsnsim/topology.hpp"
#include "vsnsim/world.hpp"

namespace vsnsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  double from = 0.0;
  double to = 1.0;
  int steps = 11;
};

struct ScenarioConfig {
  std::string topology = "grid2x2";  // builtin name or a JSON file path
  long duration_s = 10800;
  long warmup_s = 300;
  std::optional<double> saturation;
  std::optional<SweepSpec> sweep;
  int algorithm = 1;
  double ut_pos = 0.0;
  double ut_pred = 0.0;
  double ut_dec = 0.0;
  NaschParams nasch{};
  ControllerParams controller{};
  double saturation_flow_vph = 1700.0;
  double green_share = 0.5;
  double turn_probability = 0.5;
  bool include_queue_wait = true;
  bool count_hellos_as_transfers = false;
  bool handoff_forwarding = false;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  double threshold() const {
    switch (algorithm) {
      case 1: return ut_pos;
      case 2: return ut_pred;
      default: return ut_dec;
    }
  }

  CollectionPolicy policy() const {
    return {static_cast<Algorithm>(algorithm), threshold()};
  }

  double entry_lambda(double sat) const {
    return sat * saturation_flow_vph / 3600.0 * green_share;
  }

  Topology load_topology() const {
    if (topology.size() > 5 && topology.substr(topology.size() - 5) == ".json")
      return Topology::load(topology);
    return Topology::builtin(topology);
  }

  void validate() const {
    if (duration_s <= 0) throw ConfigError("duration_s must be positive");
    if (warmup_s < 0 || warmup_s >= duration_s)
      throw ConfigError("warmup_s must lie inside the run duration");
    if (algorithm < 1 || algorithm > 3) throw ConfigError("algorithm must be 1, 2 or 3");
    if (ut_pos < 0 || ut_pred < 0 || ut_dec < 0) throw ConfigError("thresholds must be >= 0");
    if (saturation && (*saturation < 0.0 || *saturation > 1.0))
      throw ConfigError("saturation must be within [0,1]");
    if (sweep) {
      if (sweep->from < 0.0 || sweep->to > 1.0 || sweep->from > sweep->to)
        throw ConfigError("sweep bounds must satisfy 0 <= from <= to <= 1");
      if (sweep->steps < 1) throw ConfigError("sweep steps must be >= 1");
    }
    if (!saturation && !sweep) throw ConfigError("demand requires saturation or sweep");
    if (nasch.v_max < 1) throw ConfigError("v_max must be >= 1");
    if (nasch.p_brake < 0.0 || nasch.p_brake > 1.0) throw ConfigError("p_brake must be in [0,1]");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
  }

  std::vector<double> sweep_levels() const {
    if (saturation) return {*saturation};
    std::vector<double> levels;
    const SweepSpec& s = *sweep;
    if (s.steps == 1) return {s.from};
    for (int i = 0; i < s.steps; ++i)
      levels.push_back(s.from + (s.to - s.from) * i / (s.steps - 1));
    return levels;
  }

  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::string& path);
};

namespace detail {

// thresholds may be numeric or the string "inf"
inline double threshold_value(const nlohmann::json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    throw ConfigError("bad threshold string: " + s);
  }
  return v.get<double>();
}

}  // namespace detail

inline ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.topology = j.value("topology", c.topology);
  c.duration_s = j.value("duration_s", c.duration_s);
  c.warmup_s = j.value("warmup_s", c.warmup_s);
  if (j.contains("demand")) {
    const auto& d = j.at("demand");
    if (d.contains("saturation")) c.saturation = d.at("saturation").get<double>();
    if (d.contains("sweep")) {
      SweepSpec s;
      s.from = d.at("sweep").value("from", 0.0);
      s.to = d.at("sweep").value("to", 1.0);
      s.steps = d.at("sweep").value("steps", 11);
      c.sweep = s;
    }
  }
  c.algorithm = j.value("algorithm", c.algorithm);
  if (j.contains("ut_pos")) c.ut_pos = detail::threshold_value(j.at("ut_pos"));
  if (j.contains("ut_pred")) c.ut_pred = detail::threshold_value(j.at("ut_pred"));
  if (j.contains("ut_dec")) c.ut_dec = detail::threshold_value(j.at("ut_dec"));
  if (j.contains("nasch")) {
    c.nasch.v_max = j.at("nasch").value("v_max", c.nasch.v_max);
    c.nasch.p_brake = j.at("nasch").value("p", j.at("nasch").value("p_brake", c.nasch.p_brake));
  }
  if (j.contains("controller")) {
    const auto& k = j.at("controller");
    c.controller.t_max = k.value("t_max", c.controller.t_max);
    c.controller.tau = k.value("tau", c.controller.tau);
    c.controller.tau0 = k.value("tau0", c.controller.tau0);
    c.controller.tau_pen = k.value("tau_pen", c.controller.tau_pen);
    c.controller.eps_denominator = k.value("eps_denominator", c.controller.eps_denominator);
    c.controller.min_green = k.value("min_green", c.controller.min_green);
    c.controller.belief.horizon_cap_s = k.value("horizon_cap_s", c.controller.belief.horizon_cap_s);
  }
  c.controller.belief.v_max = c.nasch.v_max;
  c.controller.belief.p_brake = c.nasch.p_brake;
  c.saturation_flow_vph = j.value("saturation_flow_vph", c.saturation_flow_vph);
  c.green_share = j.value("green_share", c.green_share);
  c.turn_probability = j.value("turn_probability", c.turn_probability);
  c.include_queue_wait = j.value("include_queue_wait", c.include_queue_wait);
  c.count_hellos_as_transfers = j.value("count_hellos_as_transfers", c.count_hellos_as_transfers);
  c.handoff_forwarding = j.value("handoff_forwarding", c.handoff_forwarding);
  if (j.contains("seed")) c.seeds = {j.at("seed").get<std::uint64_t>()};
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.validate();
  return c;
}

inline ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

}  // namespace vsnsim
