// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sonicdist/sim/world.hpp"

namespace sonicdist::scenario {

inline std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
}

inline std::optional<double> mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Median of |estimate - true distance|: error against ground truth, not spread.
inline std::optional<double> median_absolute_error(const std::vector<sim::EstimateRecord>& est) {
  std::vector<double> err;
  err.reserve(est.size());
  for (const auto& e : est) err.push_back(std::abs(e.est_m - e.true_m));
  return median(std::move(err));
}

inline std::string pair_label(const std::string& a, const std::string& b) { return a + "-" + b; }

struct PairAccuracy {
  std::string pair;  // unordered, lexicographic
  double true_m_mean = 0.0;
  double mad_m = 0.0;
  std::size_t estimates = 0;
};

struct Summary {
  std::size_t estimate_count = 0;
  std::optional<double> mad_m;
  std::vector<PairAccuracy> pairs;
  std::size_t alert_count = 0;
  /// Furthest true separation at which any alert fired.
  std::optional<double> alert_distance_m;
  std::vector<double> times_to_alert_s;  // one per device whose truth crossed the tolerance
  std::size_t devices_without_alert = 0;
  /// Mean time between estimates that use two new pulses, averaged over pairs.
  std::optional<double> update_period_s;
  /// Longest such interval seen by any pair: the time for the whole group to refresh.
  std::optional<double> full_group_update_s;
  double missed_round_rate = 0.0;
  std::uint64_t dropped_messages = 0;
  sim::WorldCounters counters;
};

/// Ground truth for the quantities that need trajectories.
struct Truth {
  std::vector<std::string> devices;
  std::function<double(const std::string&, const std::string&, double)> distance;
  double tolerance_m = 2.0;
  double duration_s = 0.0;
};

namespace detail {

/// First time the pair goes from >= tol to < tol, refined by bisection.
inline std::optional<double> first_crossing(const Truth& truth, const std::string& a, const std::string& b) {
  const double step = 1e-3;
  double prev_t = 0.0;
  if (truth.distance(a, b, 0.0) < truth.tolerance_m) return std::nullopt;
  const auto n = static_cast<long>(std::ceil(truth.duration_s / step));
  for (long k = 1; k <= n; ++k) {
    const double t = std::min(truth.duration_s, static_cast<double>(k) * step);
    if (truth.distance(a, b, t) < truth.tolerance_m) {
      double lo = prev_t, hi = t;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (truth.distance(a, b, mid) < truth.tolerance_m ? hi : lo) = mid;
      }
      return hi;
    }
    prev_t = t;
  }
  return std::nullopt;
}

}  // namespace detail

inline Summary summarize(const sim::Observations& obs, const Truth* truth) {
  Summary s;
  s.estimate_count = obs.estimates.size();
  s.mad_m = median_absolute_error(obs.estimates);

  std::map<std::string, std::vector<sim::EstimateRecord>> by_pair;
  for (const auto& e : obs.estimates)
    by_pair[e.observer < e.neighbor ? pair_label(e.observer, e.neighbor) : pair_label(e.neighbor, e.observer)]
        .push_back(e);
  for (const auto& [label, list] : by_pair) {
    double sum = 0.0;
    for (const auto& e : list) sum += e.true_m;
    s.pairs.push_back({label, sum / static_cast<double>(list.size()), *median_absolute_error(list), list.size()});
  }

  s.alert_count = obs.alerts.size();
  for (const auto& a : obs.alerts) s.alert_distance_m = std::max(s.alert_distance_m.value_or(a.true_m), a.true_m);

  // Update intervals per ordered pair, counting only estimates built from two new pulses.
  std::map<std::pair<std::string, std::string>, std::vector<const sim::EstimateRecord*>> ordered;
  for (const auto& e : obs.estimates) ordered[{e.observer, e.neighbor}].push_back(&e);
  std::vector<double> pair_means;
  for (const auto& [key, list] : ordered) {
    std::vector<double> times;
    std::int64_t last_o = std::numeric_limits<std::int64_t>::min(), last_n = last_o;
    for (const auto* e : list) {
      if (e->observer_slot > last_o && e->neighbor_slot > last_n) {
        times.push_back(e->true_time_s);
        last_o = e->observer_slot;
        last_n = e->neighbor_slot;
      }
    }
    if (times.size() < 3) continue;
    double longest = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) longest = std::max(longest, times[i] - times[i - 1]);
    pair_means.push_back((times.back() - times.front()) / static_cast<double>(times.size() - 1));
    s.full_group_update_s = std::max(s.full_group_update_s.value_or(0.0), longest);
  }
  s.update_period_s = mean(pair_means);

  const auto& c = obs.counters;
  s.counters = c;
  s.missed_round_rate = c.expected_receptions == 0
                            ? 0.0
                            : 1.0 - static_cast<double>(c.attributed_receptions) /
                                        static_cast<double>(c.expected_receptions);
  s.dropped_messages = obs.control.dropped();

  if (truth) {
    for (const auto& d : truth->devices) {
      std::optional<double> crossing;
      for (const auto& n : truth->devices) {
        if (n == d) continue;
        if (const auto t = detail::first_crossing(*truth, d, n)) crossing = std::min(crossing.value_or(*t), *t);
      }
      if (!crossing) continue;
      // Alert state at the crossing, then the first raise after it.
      bool alerting = false;
      double last_change = -1.0;
      for (const auto& a : obs.alerts)
        if (a.device == d && a.true_time_s <= *crossing && a.true_time_s > last_change) {
          alerting = true;
          last_change = a.true_time_s;
        }
      for (const auto& a : obs.alert_clears)
        if (a.device == d && a.true_time_s <= *crossing && a.true_time_s >= last_change) {
          alerting = false;
          last_change = a.true_time_s;
        }
      if (alerting) {
        s.times_to_alert_s.push_back(0.0);
        continue;
      }
      std::optional<double> raised;
      for (const auto& a : obs.alerts)
        if (a.device == d && a.true_time_s > *crossing) {
          raised = a.true_time_s;
          break;
        }
      if (raised) s.times_to_alert_s.push_back(*raised - *crossing);
      else ++s.devices_without_alert;
    }
  }
  return s;
}

}  // namespace sonicdist::scenario
