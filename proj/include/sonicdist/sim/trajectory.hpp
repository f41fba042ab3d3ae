// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/geometry.hpp"

namespace sonicdist::sim {

struct Waypoint {
  double time_s = 0.0;
  Vec3 position;
};

/// Piecewise-linear path; clamps outside its time range.
struct Trajectory {
  std::vector<Waypoint> waypoints;

  static Trajectory stationary(Vec3 p) { return Trajectory{{{0.0, p}}}; }

  void validate() const {
    if (waypoints.empty()) throw InvalidArgument("trajectory: no waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i)
      if (!(waypoints[i].time_s > waypoints[i - 1].time_s))
        throw InvalidArgument("trajectory: waypoint times must be strictly increasing");
  }

  double max_speed_mps() const {
    double v = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i)
      v = std::max(v, distance(waypoints[i].position, waypoints[i - 1].position) /
                          (waypoints[i].time_s - waypoints[i - 1].time_s));
    return v;
  }
};

inline Vec3 position_at(const Trajectory& tr, double t) {
  const auto& w = tr.waypoints;
  if (w.empty()) throw InvalidArgument("position_at: empty trajectory");
  if (t <= w.front().time_s) return w.front().position;
  if (t >= w.back().time_s) return w.back().position;
  const auto hi = std::upper_bound(w.begin(), w.end(), t, [](double v, const Waypoint& p) { return v < p.time_s; });
  const auto lo = hi - 1;
  const double f = (t - lo->time_s) / (hi->time_s - lo->time_s);
  return lo->position + f * (hi->position - lo->position);
}

}  // namespace sonicdist::sim
