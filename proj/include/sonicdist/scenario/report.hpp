// SPDX-License-Identifier: MIT
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonicdist/dsp/wav.hpp"
#include "sonicdist/scenario/config.hpp"
#include "sonicdist/scenario/metrics.hpp"
#include "sonicdist/scenario/runner.hpp"

namespace sonicdist::scenario {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline Json point(Vec3 p) { return Json::array({p.x, p.y, p.z}); }

}  // namespace detail

/// Every effective setting of a scenario, defaults included.
inline Json settings_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["duration_s"] = c.duration_s;
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  j["noise"] = c.noise;
  j["noise_rms"] = c.noise_rms();
  j["clocks"] = {{"offset_range_s", c.clocks.offset_range_s}, {"drift_range_ppm", c.clocks.drift_range_ppm}};
  j["ranging"] = {{"speed_of_sound_mps", c.ranging.speed_of_sound_mps},
                  {"tolerance_m", c.ranging.tolerance_m},
                  {"close_range_m", c.ranging.close_range_m},
                  {"staleness_horizon_s", c.ranging.staleness_horizon_s},
                  {"alert_hysteresis", c.ranging.alert_hysteresis}};
  j["mac"] = {{"slot_duration_s", c.slot_duration_s},
              {"pulse_lead_s", c.pulse_lead_s},
              {"discovery_s", c.discovery_s},
              {"max_round_span_s", c.max_round_span_s}};
  j["control"] = {{"latency_min_s", c.control.latency_min_s},
                  {"latency_max_s", c.control.latency_max_s},
                  {"loss_probability", c.control.loss_probability},
                  {"radio_range_m", c.control.radio_range_m},
                  {"beacon_interval_s", c.control.beacon_interval_s},
                  {"presence_timeout_beacons", c.control.presence_timeout_beacons}};
  j["audio"] = {{"block_samples", c.detector.block_samples},
                {"threshold_k", c.detector.threshold_k},
                {"relative_floor", c.detector.relative_floor},
                {"absolute_floor", c.detector.absolute_floor},
                {"max_components", c.detector.max_components},
                {"reference_gain", c.reference_gain},
                {"self_gain", c.self_gain}};
  j["pulse"] = {{"f1_hz", c.pulse.f1_hz},
                {"f2_hz", c.pulse.f2_hz},
                {"segment_duration_s", c.pulse.segment_duration_s},
                {"gap_duration_s", c.pulse.gap_duration_s},
                {"window_shape_param", c.pulse.window_shape_param}};
  Json devices = Json::array();
  for (const auto& d : c.devices) {
    Json dj;
    dj["id"] = d.id;
    dj["sample_rate_hz"] = d.sample_rate_hz;
    Json traj = Json::array();
    for (const auto& w : d.trajectory.waypoints) traj.push_back({{"t", w.time_s}, {"position", detail::point(w.position)}});
    dj["trajectory"] = traj;
    dj["clock"] = d.clock ? Json{{"offset_s", d.clock->offset_s}, {"drift_ppm", d.clock->drift_ppm}} : Json("random");
    dj["noise_rms"] = d.noise_rms.value_or(c.noise_rms());
    dj["emission_jitter_s"] = d.emission_jitter_s;
    dj["start_delay_max_s"] = d.start_delay_max_s;
    dj["join_s"] = d.join_s;
    dj["leave_s"] = detail::opt(d.leave_s);
    dj["record_audio"] = d.record_audio;
    devices.push_back(dj);
  }
  j["devices"] = devices;
  Json links = Json::array();
  for (const auto& l : c.links) {
    Json lj;
    lj["between"] = {l.a, l.b};
    const auto kind = l.link.obstruction.kind;
    lj["obstruction"] = kind == sim::ObstructionKind::none ? "none" : kind == sim::ObstructionKind::partial ? "partial" : "total";
    lj["attenuation_db"] = l.link.obstruction.attenuation_db;
    lj["direct_gain"] = l.link.paths.front().gain_factor;
    Json refl = Json::array();
    for (std::size_t i = 1; i < l.link.paths.size(); ++i)
      refl.push_back({{"extra_m", l.link.paths[i].extra_path_length_m}, {"gain", l.link.paths[i].gain_factor}});
    lj["reflections"] = refl;
    links.push_back(lj);
  }
  j["links"] = links;
  Json walls = Json::array();
  for (const auto& w : c.walls) walls.push_back({{"from", detail::point(w.from)}, {"to", detail::point(w.to)}});
  j["walls"] = walls;
  return j;
}

inline Json summary_json(const MetricsReport& r) {
  const auto& s = r.summary;
  Json j;
  j["scenario"] = r.scenario;
  j["replicate"] = r.replicate;
  j["seed"] = r.seed;
  j["duration_s"] = r.duration_s;
  Json pairs = Json::array();
  for (const auto& p : s.pairs)
    pairs.push_back({{"pair", p.pair}, {"true_m", p.true_m_mean}, {"mad_m", p.mad_m}, {"estimates", p.estimates}});
  j["accuracy"] = {{"estimates", s.estimate_count}, {"mad_m", detail::opt(s.mad_m)}, {"pairs", pairs}};
  j["alerting"] = {{"alerts", s.alert_count},
                   {"alert_distance_m", detail::opt(s.alert_distance_m)},
                   {"time_to_alert_s",
                    {{"count", s.times_to_alert_s.size()},
                     {"mean", detail::opt(mean(s.times_to_alert_s))},
                     {"median", detail::opt(median(s.times_to_alert_s))},
                     {"values", s.times_to_alert_s}}},
                   {"devices_without_alert", s.devices_without_alert}};
  j["timing"] = {{"update_period_s", detail::opt(s.update_period_s)},
                 {"full_group_update_s", detail::opt(s.full_group_update_s)}};
  j["reliability"] = {{"pulses_emitted", s.counters.pulses_emitted},
                      {"missed_round_rate", s.missed_round_rate},
                      {"dropped_messages", s.dropped_messages},
                      {"unattributed_detections", s.counters.unattributed_detections},
                      {"implausible_estimates", s.counters.implausible_estimates},
                      {"inconsistent_rounds", s.counters.inconsistent_rounds}};
  return j;
}

inline std::string estimates_csv(const MetricsReport& r) {
  std::string out = "true_time_s,pair,true_m,est_m\n";
  for (const auto& e : r.estimates)
    out += detail::fixed(e.true_time_s) + "," + pair_label(e.observer, e.neighbor) + "," + detail::fixed(e.true_m) + "," +
           detail::fixed(e.est_m) + "\n";
  return out;
}

inline std::string alerts_csv(const MetricsReport& r) {
  std::string out = "true_time_s,device,neighbor,true_m,est_m\n";
  for (const auto& a : r.alerts)
    out += detail::fixed(a.true_time_s) + "," + a.device + "," + a.neighbor + "," + detail::fixed(a.true_m) + "," +
           detail::fixed(a.est_m) + "\n";
  return out;
}

/// Writes estimates.csv, alerts.csv, summary.json and one WAV per recorded
/// device into `out_dir`.
inline void emit_report(const MetricsReport& r, const std::filesystem::path& out_dir, const Json& settings = Json(),
                        const std::vector<std::string>& explicit_keys = {}) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  detail::write_file(out_dir / "estimates.csv", estimates_csv(r));
  detail::write_file(out_dir / "alerts.csv", alerts_csv(r));
  Json j = summary_json(r);
  if (!settings.is_null()) j["settings"] = settings;
  if (!explicit_keys.empty()) j["explicit_keys"] = explicit_keys;
  detail::write_file(out_dir / "summary.json", j.dump(2) + "\n");
  for (const auto& [id, buf] : r.audio)
    dsp::write_wav((out_dir / (id + ".wav")).string(), buf.samples, static_cast<std::uint32_t>(buf.sample_rate_hz));
}

/// Pooled view over replicates, written next to the per-replicate folders.
inline Json aggregate_json(const RunResult& result) {
  Json j;
  j["replicates"] = result.replicates.size();
  std::vector<double> mads, periods;
  std::size_t without = 0;
  for (const auto& r : result.replicates) {
    if (r.summary.mad_m) mads.push_back(*r.summary.mad_m);
    if (r.summary.update_period_s) periods.push_back(*r.summary.update_period_s);
    without += r.summary.devices_without_alert;
  }
  const auto dist = result.alert_distances();
  const auto tta = result.times_to_alert();
  j["mad_m"] = {{"pooled", detail::opt(result.pooled_mad())}, {"median_of_replicates", detail::opt(median(mads))}};
  j["alert_distance_m"] = {{"count", dist.size()},
                           {"mean", detail::opt(mean(dist))},
                           {"median", detail::opt(median(dist))},
                           {"values", dist}};
  j["time_to_alert_s"] = {{"count", tta.size()}, {"mean", detail::opt(mean(tta))}, {"median", detail::opt(median(tta))}};
  j["devices_without_alert"] = without;
  j["update_period_s"] = detail::opt(mean(periods));
  return j;
}

inline std::vector<std::string> explicit_key_list(const ScenarioConfig& cfg) {
  return {cfg.explicit_keys.begin(), cfg.explicit_keys.end()};
}

/// Output layout: a single replicate writes straight into `out_dir`; several
/// go to replicate-NNN/ with a pooled summary.json on top.
inline void emit_run(const ScenarioConfig& cfg, const RunResult& result, const std::filesystem::path& out_dir) {
  const Json settings = settings_json(cfg);
  const auto keys = explicit_key_list(cfg);
  if (result.replicates.size() == 1) {
    emit_report(result.replicates.front(), out_dir, settings, keys);
    return;
  }
  for (const auto& r : result.replicates) {
    char name[32];
    std::snprintf(name, sizeof name, "replicate-%03zu", r.replicate);
    emit_report(r, out_dir / name);
  }
  Json top;
  top["scenario"] = cfg.name;
  top["aggregate"] = aggregate_json(result);
  top["settings"] = settings;
  top["explicit_keys"] = keys;
  detail::write_file(out_dir / "summary.json", top.dump(2) + "\n");
}

}  // namespace sonicdist::scenario
