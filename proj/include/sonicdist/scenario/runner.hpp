// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sonicdist/dsp/types.hpp"
#include "sonicdist/error.hpp"
#include "sonicdist/scenario/config.hpp"
#include "sonicdist/scenario/metrics.hpp"
#include "sonicdist/sim/world.hpp"

namespace sonicdist::scenario {

struct MetricsReport {
  std::string scenario;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  std::vector<sim::EstimateRecord> estimates;
  std::vector<sim::AlertRecord> alerts;
  Summary summary;
  std::vector<std::pair<std::string, dsp::SampleBuffer>> audio;
};

/// Replicates in index order plus their pooled summaries.
struct RunResult {
  std::vector<MetricsReport> replicates;

  std::vector<double> alert_distances() const {
    std::vector<double> out;
    for (const auto& r : replicates)
      if (r.summary.alert_distance_m) out.push_back(*r.summary.alert_distance_m);
    return out;
  }
  std::vector<double> times_to_alert() const {
    std::vector<double> out;
    for (const auto& r : replicates)
      out.insert(out.end(), r.summary.times_to_alert_s.begin(), r.summary.times_to_alert_s.end());
    return out;
  }
  std::optional<double> pooled_mad() const {
    std::vector<sim::EstimateRecord> all;
    for (const auto& r : replicates) all.insert(all.end(), r.estimates.begin(), r.estimates.end());
    return median_absolute_error(all);
  }
};

inline MetricsReport run_replicate(const ScenarioConfig& cfg, std::size_t k) {
  const auto wc = cfg.to_world(k);
  MetricsReport report;
  report.scenario = cfg.name;
  report.replicate = k;
  report.seed = wc.seed;
  report.duration_s = cfg.duration_s;
  try {
    sim::World world(wc);
    const auto& obs = world.advance(cfg.duration_s);
    Truth truth;
    for (const auto& d : wc.devices) truth.devices.push_back(d.id);
    truth.distance = [&world](const std::string& a, const std::string& b, double t) {
      return world.true_distance(a, b, t);
    };
    truth.tolerance_m = wc.ranging.tolerance_m;
    truth.duration_s = cfg.duration_s;
    report.summary = summarize(obs, &truth);
    report.estimates = obs.estimates;
    report.alerts = obs.alerts;
    for (const auto& d : wc.devices) {
      if (!d.record_audio) continue;
      dsp::SampleBuffer buf;
      buf.sample_rate_hz = d.sample_rate_hz;
      buf.origin_time_s = d.clock.offset_s;
      buf.samples = world.recorded_audio(d.id);
      report.audio.emplace_back(d.id, std::move(buf));
    }
  } catch (const SimulationError& e) {
    throw SimulationError("scenario '" + cfg.name + "' replicate " + std::to_string(k) + ": " + e.what());
  }
  return report;
}

/// Runs every replicate (seed + k). Worlds share nothing, so replicates may
/// run on several threads; results are stored by index.
inline RunResult run_scenario(const ScenarioConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  RunResult result;
  result.replicates.resize(cfg.replicates);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.replicates)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.replicates);
  auto work = [&] {
    for (std::size_t k = next++; k < cfg.replicates; k = next++) {
      try {
        result.replicates[k] = run_replicate(cfg, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

}  // namespace sonicdist::scenario
