// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>

#include "sonicdist/error.hpp"

namespace sonicdist::ranging {

struct RangingConfig {
  double speed_of_sound_mps = 343.0;
  double tolerance_m = 2.0;
  double close_range_m = 3.5;
  double staleness_horizon_s = 5.0;
  std::size_t alert_hysteresis = 1;

  /// Estimates above this are treated as mis-attributed or multipath-only
  /// and discarded.
  double plausible_limit_m() const noexcept { return 2.0 * close_range_m; }

  void validate() const {
    if (!(speed_of_sound_mps > 0.0)) throw InvalidArgument("ranging: speed of sound must be positive");
    if (!(tolerance_m > 0.0)) throw InvalidArgument("ranging: tolerance must be positive");
    if (!(close_range_m > 0.0)) throw InvalidArgument("ranging: close range must be positive");
    if (!(staleness_horizon_s > 0.0)) throw InvalidArgument("ranging: staleness horizon must be positive");
    if (alert_hysteresis == 0) throw InvalidArgument("ranging: hysteresis must be at least 1");
    if (tolerance_m > close_range_m) throw InvalidArgument("ranging: tolerance exceeds close range");
  }
};

}  // namespace sonicdist::ranging
