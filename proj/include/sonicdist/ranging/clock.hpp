// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>

namespace sonicdist::ranging {

/// Free-running device clock: local = true * (1 + drift) + offset.
struct DeviceClock {
  double offset_s = 0.0;
  double drift_ppm = 0.0;

  double rate() const noexcept { return 1.0 + drift_ppm * 1e-6; }
};

inline double local_time(const DeviceClock& clock, double true_time_s) noexcept {
  return true_time_s * clock.rate() + clock.offset_s;
}

inline double true_time(const DeviceClock& clock, double local_time_s) noexcept {
  return (local_time_s - clock.offset_s) / clock.rate();
}

/// Timestamps travel as integer picoseconds so that constant clock offsets
/// cancel exactly in round arithmetic.
using Picoseconds = std::int64_t;

inline Picoseconds to_picoseconds(double seconds) noexcept { return std::llround(seconds * 1e12); }
inline double to_seconds(Picoseconds ps) noexcept { return static_cast<double>(ps) * 1e-12; }

}  // namespace sonicdist::ranging
