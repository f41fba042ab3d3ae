// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/sim/world.hpp"

namespace sonicdist::scenario {

/// Ambient ultrasound-band noise RMS for the named environments, in units of
/// the pulse amplitude heard at 1 m.
inline const std::map<std::string, double>& noise_presets() {
  static const std::map<std::string, double> levels{
      {"none", 0.0}, {"quiet", 0.002}, {"office", 0.005}, {"noisy", 0.02}, {"windy", 0.05}};
  return levels;
}

struct ClockDefaults {
  double offset_range_s = 1000.0;  // offsets uniform in [-x, x]
  double drift_range_ppm = 50.0;   // drifts uniform in [-x, x]
};

struct DeviceConfig {
  std::string id;
  double sample_rate_hz = 48000.0;
  sim::Trajectory trajectory;
  std::optional<ranging::DeviceClock> clock;  // drawn from ClockDefaults when absent
  std::optional<double> noise_rms;            // scenario noise level when absent
  double emission_jitter_s = 0.0;
  /// Waypoint times are shifted by a delay drawn uniformly from [0, x] per replicate.
  double start_delay_max_s = 0.0;
  double join_s = 0.0;
  std::optional<double> leave_s;
  bool record_audio = false;
};

struct LinkConfig {
  std::string a;
  std::string b;
  sim::AcousticLink link;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string description;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::string noise = "none";
  ClockDefaults clocks;
  std::vector<DeviceConfig> devices;
  std::vector<LinkConfig> links;
  std::vector<sim::Wall> walls;
  ranging::RangingConfig ranging;
  sim::ControlConfig control;
  dsp::PulseTemplate pulse;
  dsp::DetectorConfig detector;
  double reference_gain = 1.0;
  double self_gain = 1.0;
  double slot_duration_s = 0.2;
  double pulse_lead_s = 0.04;
  double discovery_s = 0.2;
  double max_round_span_s = 2.0;
  /// Dotted paths of every key the scenario file set.
  std::set<std::string> explicit_keys;

  double noise_rms() const {
    const auto it = noise_presets().find(noise);
    if (it == noise_presets().end()) throw ScenarioError("unknown noise preset '" + noise + "'");
    return it->second;
  }

  void validate() const {
    if (!(duration_s > 0.0)) throw ScenarioError("duration_s must be positive");
    if (replicates == 0) throw ScenarioError("replicates must be at least 1");
    noise_rms();
    if (!(clocks.offset_range_s >= 0.0) || !(clocks.drift_range_ppm >= 0.0))
      throw ScenarioError("clock ranges must be non-negative");
    if (devices.empty()) throw ScenarioError("at least one device is required");
    std::set<std::string> ids;
    for (const auto& d : devices) {
      if (!ids.insert(d.id).second) throw ScenarioError("duplicate device id '" + d.id + "'");
      if (!(d.start_delay_max_s >= 0.0)) throw ScenarioError("device " + d.id + ": start_delay_max_s must be >= 0");
    }
    for (const auto& l : links)
      for (const auto& id : {l.a, l.b})
        if (!ids.contains(id)) throw ScenarioError("link references undeclared device '" + id + "'");
    try {
      to_world(0).validate();
    } catch (const InvalidArgument& e) {
      throw ScenarioError(e.what());
    }
  }

  std::uint64_t replicate_seed(std::size_t k) const { return seed + k; }

  /// World for replicate `k`: seed + k drives every random draw.
  sim::WorldConfig to_world(std::size_t k) const {
    sim::WorldConfig w;
    w.seed = replicate_seed(k);
    std::seed_seq seq{w.seed, std::uint64_t{0xc10c}};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), delay(0.0, 1.0);
    const double ambient = noise_rms();
    for (const auto& d : devices) {
      sim::DeviceSpec s;
      s.id = d.id;
      s.sample_rate_hz = d.sample_rate_hz;
      // Draw unconditionally so one device's explicit clock does not shift the others.
      const ranging::DeviceClock drawn{unit(rng) * clocks.offset_range_s, unit(rng) * clocks.drift_range_ppm};
      const double shift = delay(rng) * d.start_delay_max_s;
      s.clock = d.clock.value_or(drawn);
      s.trajectory = d.trajectory;
      for (auto& wp : s.trajectory.waypoints) wp.time_s += shift;
      s.noise_rms = d.noise_rms.value_or(ambient);
      s.emission_jitter_s = d.emission_jitter_s;
      s.join_s = d.join_s;
      s.leave_s = d.leave_s;
      s.record_audio = d.record_audio;
      w.devices.push_back(std::move(s));
    }
    for (const auto& l : links) w.links.push_back({l.a, l.b, l.link});
    w.walls = walls;
    w.ranging = ranging;
    w.control = control;
    w.propagation.speed_of_sound_mps = ranging.speed_of_sound_mps;
    w.propagation.reference_gain = reference_gain;
    w.pulse = pulse;
    w.detector = detector;
    w.slot_duration_s = slot_duration_s;
    w.pulse_lead_s = pulse_lead_s;
    w.self_gain = self_gain;
    w.discovery_s = discovery_s;
    w.max_round_span_s = max_round_span_s;
    return w;
  }
};

}  // namespace sonicdist::scenario
