// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/mac/conflict_graph.hpp"

namespace sonicdist::mac {

struct SlotSchedule {
  std::map<std::string, std::size_t> slot_assignment;
  std::size_t frame_length = 0;
  double slot_duration_s = 0.2;

  double frame_span_s() const noexcept { return static_cast<double>(frame_length) * slot_duration_s; }
  bool empty() const noexcept { return slot_assignment.empty(); }

  friend bool operator==(const SlotSchedule&, const SlotSchedule&) = default;
};

/// Greedy colouring in ascending id order: each device takes the lowest slot
/// unused by its already-coloured neighbours.
inline SlotSchedule assign_slots(const ConflictGraph& graph, double slot_duration_s = 0.2) {
  if (!(slot_duration_s > 0.0)) throw InvalidArgument("assign_slots: slot duration must be positive");
  SlotSchedule s;
  s.slot_duration_s = slot_duration_s;
  for (const auto& id : graph.vertices()) {
    std::set<std::size_t> taken;
    for (const auto& n : graph.neighbors(id)) {
      const auto it = s.slot_assignment.find(n);
      if (it != s.slot_assignment.end()) taken.insert(it->second);
    }
    std::size_t slot = 0;
    while (taken.contains(slot)) ++slot;
    s.slot_assignment[id] = slot;
    s.frame_length = std::max(s.frame_length, slot + 1);
  }
  return s;
}

enum class MembershipChange { join, leave };

struct MembershipEvent {
  MembershipChange kind = MembershipChange::join;
  std::string device;
};

struct MembershipUpdate {
  SlotSchedule schedule;
  ConflictGraph graph;
  bool warning = false;
  std::string message;
};

/// Applies a join or leave. For a join, `graph` should already hold the new
/// device's conflicts (it is added isolated otherwise); for a leave the device
/// is removed from it. Duplicate joins and unknown leaves change nothing and
/// set `warning`.
inline MembershipUpdate update_membership(const SlotSchedule& schedule, const ConflictGraph& graph,
                                          const MembershipEvent& event) {
  MembershipUpdate out{schedule, graph, false, {}};
  const bool present = schedule.slot_assignment.contains(event.device);
  if (event.kind == MembershipChange::join) {
    if (present) {
      out.warning = true;
      out.message = "duplicate join of " + event.device;
      return out;
    }
    out.graph.add_vertex(event.device);
  } else {
    if (!present) {
      out.warning = true;
      out.message = "leave of unknown device " + event.device;
      return out;
    }
    out.graph.remove_vertex(event.device);
  }
  out.schedule = assign_slots(out.graph, schedule.slot_duration_s);
  return out;
}

inline std::size_t slot_index_at(const SlotSchedule& schedule, double now_s) {
  if (now_s < 0.0) throw InvalidArgument("slot index: negative time");
  // The small bias keeps exact slot boundaries such as 3 * 0.2 in the new slot.
  return static_cast<std::size_t>(std::floor(now_s / schedule.slot_duration_s + 1e-9));
}

/// Devices allowed to pulse at `now_s`.
inline std::vector<std::string> next_transmitter(const SlotSchedule& schedule, double now_s) {
  if (schedule.empty() || schedule.frame_length == 0) throw InvalidArgument("next_transmitter: empty schedule");
  const std::size_t slot = slot_index_at(schedule, now_s) % schedule.frame_length;
  std::vector<std::string> out;
  for (const auto& [id, s] : schedule.slot_assignment)
    if (s == slot) out.push_back(id);
  return out;
}

/// Pairs of conflicting devices sharing a slot; empty for a valid schedule.
inline std::vector<std::pair<std::string, std::string>> schedule_conflicts(const SlotSchedule& schedule,
                                                                           const ConflictGraph& graph) {
  std::vector<std::pair<std::string, std::string>> bad;
  for (const auto& [a, b] : graph.edges()) {
    const auto ia = schedule.slot_assignment.find(a), ib = schedule.slot_assignment.find(b);
    if (ia != schedule.slot_assignment.end() && ib != schedule.slot_assignment.end() && ia->second == ib->second)
      bad.emplace_back(a, b);
  }
  return bad;
}

}  // namespace sonicdist::mac
