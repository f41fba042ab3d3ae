// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <string>

#include "sonicdist/error.hpp"
#include "sonicdist/ranging/clock.hpp"
#include "sonicdist/ranging/config.hpp"

namespace sonicdist::ranging {

/// Four-timestamp exchange between an initiator A and a responder C. Each
/// timestamp is in the clock of the device that took it.
struct RangingRound {
  std::string initiator;
  std::string responder;
  std::optional<Picoseconds> t_a1;  // A emits (A's clock)
  std::optional<Picoseconds> t_c1;  // C hears A (C's clock)
  std::optional<Picoseconds> t_c3;  // C emits (C's clock)
  std::optional<Picoseconds> t_a3;  // A hears C (A's clock)

  bool complete() const noexcept { return t_a1 && t_c1 && t_c3 && t_a3; }
};

/// d = c * ((t_C1 - t_A1) + (t_A3 - t_C3)) / 2
inline double compute_distance(const RangingRound& round, const RangingConfig& cfg) {
  if (!round.complete())
    throw IncompleteRound("ranging round " + round.initiator + "-" + round.responder + " is missing a timestamp");
  const Picoseconds two_way = (*round.t_c1 - *round.t_a1) + (*round.t_a3 - *round.t_c3);
  const double d = cfg.speed_of_sound_mps * to_seconds(two_way) / 2.0;
  if (!(d > 0.0))
    throw InconsistentRound("ranging round " + round.initiator + "-" + round.responder +
                            " gives a non-positive distance");
  return d;
}

}  // namespace sonicdist::ranging
