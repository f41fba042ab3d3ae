// SPDX-License-Identifier: MIT
#pragma once

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/scenario/config.hpp"

namespace sonicdist::scenario {

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

class Reader {
 public:
  explicit Reader(std::set<std::string>& seen) : seen_(seen) {}

  void expect_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) throw ScenarioError(path + ": expected a mapping", line_of(n));
  }

  void allow(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> keys) const {
    expect_map(n, path);
    std::set<std::string> present;
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) throw ScenarioError("unknown key '" + key + "' in " + path, line_of(kv.first));
      if (!present.insert(key).second) throw ScenarioError("duplicate key '" + key + "' in " + path, line_of(kv.first));
    }
  }

  template <typename T>
  bool get(const YAML::Node& map, const char* key, T& out, const std::string& path) {
    const YAML::Node n = map[key];
    if (!n) return false;
    const std::string full = path.empty() ? key : path + "." + key;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ScenarioError(full + ": " + type_name<T>(), line_of(n));
    }
    seen_.insert(full);
    return true;
  }

  template <typename T>
  bool get(const YAML::Node& map, const char* key, std::optional<T>& out, const std::string& path) {
    T v{};
    if (!get(map, key, v, path)) return false;
    out = v;
    return true;
  }

  Vec3 point(const YAML::Node& n, const std::string& path, bool planar = false) const {
    const std::size_t want = planar ? 2 : 3;
    if (!n.IsSequence() || (n.size() != want && !(planar && n.size() == 3)))
      throw ScenarioError(path + ": expected a list of " + std::to_string(want) + " numbers", line_of(n));
    try {
      return {n[0].as<double>(), n[1].as<double>(), n.size() > 2 ? n[2].as<double>() : 0.0};
    } catch (const YAML::Exception&) {
      throw ScenarioError(path + ": expected numbers", line_of(n));
    }
  }

  void mark(const std::string& path) { seen_.insert(path); }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "expected true or false";
    else if constexpr (std::is_integral_v<T>) return "expected a non-negative integer";
    else if constexpr (std::is_floating_point_v<T>) return "expected a number";
    else return "expected a string";
  }

  std::set<std::string>& seen_;
};

inline void read_device(Reader& r, const YAML::Node& n, const std::string& path, DeviceConfig& d) {
  r.allow(n, path, {"id", "sample_rate_hz", "position", "trajectory", "clock", "noise_rms", "emission_jitter_s",
                    "start_delay_max_s", "join_s", "leave_s", "record_audio"});
  if (!r.get(n, "id", d.id, path)) throw ScenarioError(path + ": missing 'id'", line_of(n));
  r.get(n, "sample_rate_hz", d.sample_rate_hz, path);
  const bool has_pos = static_cast<bool>(n["position"]), has_traj = static_cast<bool>(n["trajectory"]);
  if (has_pos == has_traj)
    throw ScenarioError(path + ": exactly one of 'position' or 'trajectory' is required", line_of(n));
  if (has_pos) {
    d.trajectory = sim::Trajectory::stationary(r.point(n["position"], path + ".position"));
    r.mark(path + ".position");
  } else {
    const YAML::Node t = n["trajectory"];
    if (!t.IsSequence() || t.size() == 0)
      throw ScenarioError(path + ".trajectory: expected a non-empty list", line_of(t));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string wp_path = path + ".trajectory[" + std::to_string(i) + "]";
      r.allow(t[i], wp_path, {"t", "position"});
      std::set<std::string> ignore;
      Reader inner(ignore);
      sim::Waypoint wp;
      if (!inner.get(t[i], "t", wp.time_s, wp_path) || !t[i]["position"])
        throw ScenarioError(wp_path + ": needs 't' and 'position'", line_of(t[i]));
      wp.position = r.point(t[i]["position"], wp_path + ".position");
      d.trajectory.waypoints.push_back(wp);
    }
    try {
      d.trajectory.validate();
    } catch (const InvalidArgument& e) {
      throw ScenarioError(path + ": " + e.what(), line_of(t));
    }
    r.mark(path + ".trajectory");
  }
  if (const YAML::Node c = n["clock"]) {
    r.allow(c, path + ".clock", {"offset_s", "drift_ppm"});
    ranging::DeviceClock clock;
    r.get(c, "offset_s", clock.offset_s, path + ".clock");
    r.get(c, "drift_ppm", clock.drift_ppm, path + ".clock");
    d.clock = clock;
  }
  r.get(n, "noise_rms", d.noise_rms, path);
  r.get(n, "emission_jitter_s", d.emission_jitter_s, path);
  r.get(n, "start_delay_max_s", d.start_delay_max_s, path);
  r.get(n, "join_s", d.join_s, path);
  r.get(n, "leave_s", d.leave_s, path);
  r.get(n, "record_audio", d.record_audio, path);
}

inline void read_link(Reader& r, const YAML::Node& n, const std::string& path, LinkConfig& l,
                      const std::set<std::string>& ids) {
  r.allow(n, path, {"between", "obstruction", "attenuation_db", "direct_gain", "reflections"});
  const YAML::Node between = n["between"];
  if (!between || !between.IsSequence() || between.size() != 2)
    throw ScenarioError(path + ".between: expected two device ids", line_of(between ? between : n));
  l.a = between[0].as<std::string>();
  l.b = between[1].as<std::string>();
  for (const auto& id : {l.a, l.b})
    if (!ids.contains(id)) throw ScenarioError(path + ": undeclared device '" + id + "'", line_of(between));
  r.mark(path + ".between");
  std::string obstruction = "none";
  r.get(n, "obstruction", obstruction, path);
  if (obstruction == "none") l.link.obstruction = {sim::ObstructionKind::none, 0.0};
  else if (obstruction == "partial") l.link.obstruction = {sim::ObstructionKind::partial, 0.0};
  else if (obstruction == "total") l.link.obstruction = {sim::ObstructionKind::total, 0.0};
  else throw ScenarioError(path + ".obstruction: expected none, partial or total", line_of(n["obstruction"]));
  if (n["attenuation_db"] && obstruction != "partial")
    throw ScenarioError(path + ": attenuation_db only applies to partial obstruction", line_of(n["attenuation_db"]));
  r.get(n, "attenuation_db", l.link.obstruction.attenuation_db, path);
  r.get(n, "direct_gain", l.link.paths.front().gain_factor, path);
  if (const YAML::Node refl = n["reflections"]) {
    if (!refl.IsSequence()) throw ScenarioError(path + ".reflections: expected a list", line_of(refl));
    for (std::size_t i = 0; i < refl.size(); ++i) {
      const std::string rp = path + ".reflections[" + std::to_string(i) + "]";
      r.allow(refl[i], rp, {"extra_m", "gain"});
      sim::ChannelPath p{sim::PathKind::reflected, 0.0, 1.0};
      if (!r.get(refl[i], "extra_m", p.extra_path_length_m, rp) || !r.get(refl[i], "gain", p.gain_factor, rp))
        throw ScenarioError(rp + ": needs 'extra_m' and 'gain'", line_of(refl[i]));
      l.link.paths.push_back(p);
    }
  }
  try {
    l.link.validate();
  } catch (const InvalidArgument& e) {
    throw ScenarioError(path + ": " + e.what(), line_of(n));
  }
}

/// Parses and validates a scenario document. Unknown keys, bad types and
/// dangling device references are errors carrying the offending line.
inline ScenarioConfig parse_scenario_unchecked(const std::string& text, const std::string& fallback_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string("parse error: ") + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
  ScenarioConfig cfg;
  cfg.name = fallback_name;
  Reader r(cfg.explicit_keys);
  r.allow(root, "scenario", {"name", "description", "duration_s", "seed", "replicates", "noise", "clocks", "ranging",
                             "mac", "control", "audio", "pulse", "devices", "links", "walls"});
  r.get(root, "name", cfg.name, "");
  r.get(root, "description", cfg.description, "");
  if (!r.get(root, "duration_s", cfg.duration_s, "")) throw ScenarioError("missing 'duration_s'", line_of(root));
  r.get(root, "seed", cfg.seed, "");
  r.get(root, "replicates", cfg.replicates, "");
  if (r.get(root, "noise", cfg.noise, "") && !noise_presets().contains(cfg.noise))
    throw ScenarioError("noise: unknown preset '" + cfg.noise + "'", line_of(root["noise"]));

  if (const YAML::Node n = root["clocks"]) {
    r.allow(n, "clocks", {"offset_range_s", "drift_range_ppm"});
    r.get(n, "offset_range_s", cfg.clocks.offset_range_s, "clocks");
    r.get(n, "drift_range_ppm", cfg.clocks.drift_range_ppm, "clocks");
  }
  if (const YAML::Node n = root["ranging"]) {
    r.allow(n, "ranging",
            {"speed_of_sound_mps", "tolerance_m", "close_range_m", "staleness_horizon_s", "alert_hysteresis"});
    r.get(n, "speed_of_sound_mps", cfg.ranging.speed_of_sound_mps, "ranging");
    r.get(n, "tolerance_m", cfg.ranging.tolerance_m, "ranging");
    r.get(n, "close_range_m", cfg.ranging.close_range_m, "ranging");
    r.get(n, "staleness_horizon_s", cfg.ranging.staleness_horizon_s, "ranging");
    r.get(n, "alert_hysteresis", cfg.ranging.alert_hysteresis, "ranging");
  }
  if (const YAML::Node n = root["mac"]) {
    r.allow(n, "mac", {"slot_duration_s", "pulse_lead_s", "discovery_s", "max_round_span_s"});
    r.get(n, "slot_duration_s", cfg.slot_duration_s, "mac");
    r.get(n, "pulse_lead_s", cfg.pulse_lead_s, "mac");
    r.get(n, "discovery_s", cfg.discovery_s, "mac");
    r.get(n, "max_round_span_s", cfg.max_round_span_s, "mac");
  }
  if (const YAML::Node n = root["control"]) {
    r.allow(n, "control", {"latency_min_s", "latency_max_s", "loss_probability", "radio_range_m", "beacon_interval_s",
                           "presence_timeout_beacons"});
    r.get(n, "latency_min_s", cfg.control.latency_min_s, "control");
    r.get(n, "latency_max_s", cfg.control.latency_max_s, "control");
    r.get(n, "loss_probability", cfg.control.loss_probability, "control");
    r.get(n, "radio_range_m", cfg.control.radio_range_m, "control");
    r.get(n, "beacon_interval_s", cfg.control.beacon_interval_s, "control");
    r.get(n, "presence_timeout_beacons", cfg.control.presence_timeout_beacons, "control");
  }
  if (const YAML::Node n = root["audio"]) {
    r.allow(n, "audio", {"block_samples", "threshold_k", "relative_floor", "absolute_floor", "max_components",
                         "reference_gain", "self_gain"});
    r.get(n, "block_samples", cfg.detector.block_samples, "audio");
    r.get(n, "threshold_k", cfg.detector.threshold_k, "audio");
    r.get(n, "relative_floor", cfg.detector.relative_floor, "audio");
    r.get(n, "absolute_floor", cfg.detector.absolute_floor, "audio");
    r.get(n, "max_components", cfg.detector.max_components, "audio");
    r.get(n, "reference_gain", cfg.reference_gain, "audio");
    r.get(n, "self_gain", cfg.self_gain, "audio");
  }
  if (const YAML::Node n = root["pulse"]) {
    r.allow(n, "pulse", {"f1_hz", "f2_hz", "segment_duration_s", "gap_duration_s", "window_shape_param"});
    r.get(n, "f1_hz", cfg.pulse.f1_hz, "pulse");
    r.get(n, "f2_hz", cfg.pulse.f2_hz, "pulse");
    r.get(n, "segment_duration_s", cfg.pulse.segment_duration_s, "pulse");
    r.get(n, "gap_duration_s", cfg.pulse.gap_duration_s, "pulse");
    r.get(n, "window_shape_param", cfg.pulse.window_shape_param, "pulse");
  }

  const YAML::Node devices = root["devices"];
  if (!devices || !devices.IsSequence() || devices.size() == 0)
    throw ScenarioError("'devices' must be a non-empty list", line_of(devices ? devices : root));
  std::set<std::string> ids;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    DeviceConfig d;
    read_device(r, devices[i], "devices[" + std::to_string(i) + "]", d);
    if (!ids.insert(d.id).second)
      throw ScenarioError("duplicate device id '" + d.id + "'", line_of(devices[i]));
    cfg.devices.push_back(std::move(d));
  }
  if (const YAML::Node links = root["links"]) {
    if (!links.IsSequence()) throw ScenarioError("'links' must be a list", line_of(links));
    for (std::size_t i = 0; i < links.size(); ++i) {
      LinkConfig l;
      read_link(r, links[i], "links[" + std::to_string(i) + "]", l, ids);
      cfg.links.push_back(std::move(l));
    }
  }
  if (const YAML::Node walls = root["walls"]) {
    if (!walls.IsSequence()) throw ScenarioError("'walls' must be a list", line_of(walls));
    for (std::size_t i = 0; i < walls.size(); ++i) {
      const std::string wp = "walls[" + std::to_string(i) + "]";
      r.allow(walls[i], wp, {"from", "to"});
      if (!walls[i]["from"] || !walls[i]["to"]) throw ScenarioError(wp + ": needs 'from' and 'to'", line_of(walls[i]));
      cfg.walls.push_back({r.point(walls[i]["from"], wp + ".from", true), r.point(walls[i]["to"], wp + ".to", true)});
      r.mark(wp);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text, const std::string& fallback_name = "scenario") {
  try {
    return detail::parse_scenario_unchecked(text, fallback_name);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_scenario(ss.str(), stem);
}

}  // namespace sonicdist::scenario
