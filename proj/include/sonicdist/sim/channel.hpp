// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sonicdist/error.hpp"
#include "sonicdist/geometry.hpp"
#include "sonicdist/sim/trajectory.hpp"

namespace sonicdist::sim {

enum class PathKind { direct, reflected };

struct ChannelPath {
  PathKind kind = PathKind::direct;
  double extra_path_length_m = 0.0;
  double gain_factor = 1.0;
};

enum class ObstructionKind { none, partial, total };

struct Obstruction {
  ObstructionKind kind = ObstructionKind::none;
  double attenuation_db = 0.0;  // partial only
};

/// Propagation description for an unordered device pair. `paths` holds the
/// direct path first, then any reflections.
struct AcousticLink {
  std::vector<ChannelPath> paths{ChannelPath{}};
  Obstruction obstruction;

  void validate() const {
    if (paths.empty() || paths.front().kind != PathKind::direct)
      throw InvalidArgument("acoustic link: first path must be the direct path");
    const ChannelPath& direct = paths.front();
    if (direct.extra_path_length_m != 0.0) throw InvalidArgument("acoustic link: direct path has extra length");
    for (const auto& p : paths) {
      if (!(p.gain_factor > 0.0 && p.gain_factor <= 1.0))
        throw InvalidArgument("acoustic link: path gain must lie in (0, 1]");
      if (&p == &direct) continue;
      if (p.kind != PathKind::reflected) throw InvalidArgument("acoustic link: only one direct path allowed");
      if (!(p.extra_path_length_m > 0.0))
        throw InvalidArgument("acoustic link: reflected path needs a positive extra length");
      if (obstruction.kind == ObstructionKind::none && p.gain_factor > direct.gain_factor)
        throw InvalidArgument("acoustic link: reflection stronger than an unobstructed direct path");
    }
    if (obstruction.kind == ObstructionKind::partial && !(obstruction.attenuation_db >= 0.0))
      throw InvalidArgument("acoustic link: partial obstruction needs a non-negative attenuation");
  }
};

/// One delivered copy of a pulse.
struct Arrival {
  PathKind kind = PathKind::direct;
  double true_time_s = 0.0;
  double gain = 0.0;
  double path_length_m = 0.0;
};

struct PropagationModel {
  double speed_of_sound_mps = 343.0;
  double reference_gain = 1.0;   // amplitude at 1 m
  double min_spreading_m = 0.1;  // spreading loss saturates below this
};

inline double db_to_amplitude(double db) { return std::pow(10.0, -db / 20.0); }

/// Arrivals at `rx` of a pulse leaving `tx` at `emit_true_time_s`. Flight time
/// accounts for the receiver moving while the sound travels.
inline std::vector<Arrival> propagate(const AcousticLink& link, const Trajectory& tx, const Trajectory& rx,
                                      double emit_true_time_s, const PropagationModel& model) {
  const Vec3 from = position_at(tx, emit_true_time_s);
  std::vector<Arrival> out;
  for (const auto& path : link.paths) {
    const bool direct = path.kind == PathKind::direct;
    if (direct && link.obstruction.kind == ObstructionKind::total) continue;
    double arrival = emit_true_time_s;
    double length = 0.0;
    for (int it = 0; it < 32; ++it) {
      length = distance(from, position_at(rx, arrival)) + path.extra_path_length_m;
      const double next = emit_true_time_s + length / model.speed_of_sound_mps;
      const bool done = std::abs(next - arrival) < 1e-13;
      arrival = next;
      if (done) break;
    }
    double gain = model.reference_gain * path.gain_factor / std::max(length, model.min_spreading_m);
    if (direct && link.obstruction.kind == ObstructionKind::partial)
      gain *= db_to_amplitude(link.obstruction.attenuation_db);
    out.push_back({path.kind, arrival, gain, length});
  }
  return out;
}

/// Wall segment in the horizontal plane; a link whose straight line crosses
/// it is totally obstructed.
struct Wall {
  Vec3 from;
  Vec3 to;
};

inline bool crosses(const Wall& w, Vec3 a, Vec3 b) {
  auto orient = [](Vec3 p, Vec3 q, Vec3 r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
  const double d1 = orient(w.from, w.to, a), d2 = orient(w.from, w.to, b);
  const double d3 = orient(a, b, w.from), d4 = orient(a, b, w.to);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace sonicdist::sim
