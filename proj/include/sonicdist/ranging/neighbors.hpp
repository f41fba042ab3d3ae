// SPDX-License-Identifier: MIT
#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "sonicdist/error.hpp"
#include "sonicdist/ranging/config.hpp"

namespace sonicdist::ranging {

enum class Classification { breaching, close, connected };

inline const char* to_string(Classification c) noexcept {
  switch (c) {
    case Classification::breaching: return "breaching";
    case Classification::close: return "close";
    case Classification::connected: return "connected";
  }
  return "?";
}

struct NeighborEntry {
  std::optional<double> last_distance_m;
  double last_update_s = 0.0;
  /// Times of the current run of consecutive breaching estimates, newest last,
  /// capped at the hysteresis count.
  std::deque<double> breach_streak;
};

/// One device's view of its neighbours. Every known neighbour is connected
/// (X); a fresh estimate inside close range makes it close (C), inside the
/// tolerance breaching (B).
struct NeighborTable {
  std::map<std::string, NeighborEntry> entries;

  bool contains(const std::string& id) const { return entries.contains(id); }
};

inline bool is_fresh(const NeighborEntry& e, const RangingConfig& cfg, double now_s) noexcept {
  return e.last_distance_m.has_value() && now_s - e.last_update_s <= cfg.staleness_horizon_s;
}

inline Classification classify(const NeighborEntry& e, const RangingConfig& cfg, double now_s) noexcept {
  if (!is_fresh(e, cfg, now_s)) return Classification::connected;
  if (*e.last_distance_m < cfg.tolerance_m) return Classification::breaching;
  if (*e.last_distance_m < cfg.close_range_m) return Classification::close;
  return Classification::connected;
}

/// Adds a neighbour to X without an estimate (heard on the control channel).
inline NeighborTable register_connected(NeighborTable table, const std::string& id) {
  table.entries.try_emplace(id);
  return table;
}

inline NeighborTable forget_neighbor(NeighborTable table, const std::string& id) {
  table.entries.erase(id);
  return table;
}

inline NeighborTable update_neighbor(NeighborTable table, const std::string& id, double distance_m, double now_s,
                                     const RangingConfig& cfg) {
  if (!(distance_m > 0.0)) throw InvalidArgument("update_neighbor: distance must be positive");
  auto& e = table.entries[id];
  e.last_distance_m = distance_m;
  e.last_update_s = now_s;
  if (distance_m < cfg.tolerance_m) {
    e.breach_streak.push_back(now_s);
    while (e.breach_streak.size() > cfg.alert_hysteresis) e.breach_streak.pop_front();
  } else {
    e.breach_streak.clear();
  }
  return table;
}

/// Members of B, C or X at `now_s`; nested by construction.
inline std::set<std::string> members(const NeighborTable& table, Classification at_least, const RangingConfig& cfg,
                                     double now_s) {
  std::set<std::string> out;
  for (const auto& [id, e] : table.entries)
    if (static_cast<int>(classify(e, cfg, now_s)) <= static_cast<int>(at_least)) out.insert(id);
  return out;
}

struct AlertDecision {
  bool alert = false;
  std::string neighbor;
  double distance_m = 0.0;
};

inline AlertDecision check_alert(const NeighborTable& table, const RangingConfig& cfg, double now_s) {
  AlertDecision best;
  for (const auto& [id, e] : table.entries) {
    if (e.breach_streak.size() < cfg.alert_hysteresis) continue;
    if (now_s - e.breach_streak.front() > cfg.staleness_horizon_s) continue;
    if (!best.alert || *e.last_distance_m < best.distance_m) best = {true, id, *e.last_distance_m};
  }
  return best;
}

}  // namespace sonicdist::ranging
