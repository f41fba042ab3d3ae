// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "sonicdist/error.hpp"

namespace sonicdist::sim {

/// Radio side channel. Latency is uniform in [min, max]; messages between one
/// ordered pair are never reordered.
struct ControlConfig {
  double latency_min_s = 0.010;
  double latency_max_s = 0.030;
  double loss_probability = 0.0;
  double radio_range_m = 30.0;
  double beacon_interval_s = 1.0;
  /// A neighbour not heard for this many beacon intervals is forgotten.
  double presence_timeout_beacons = 3.0;

  void validate() const {
    if (!(latency_min_s >= 0.0 && latency_max_s >= latency_min_s))
      throw InvalidArgument("control: need 0 <= latency_min_s <= latency_max_s");
    if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
      throw InvalidArgument("control: loss_probability must lie in [0, 1]");
    if (!(radio_range_m > 0.0)) throw InvalidArgument("control: radio_range_m must be positive");
    if (!(beacon_interval_s > 0.0)) throw InvalidArgument("control: beacon_interval_s must be positive");
    if (!(presence_timeout_beacons >= 1.0))
      throw InvalidArgument("control: presence_timeout_beacons must be at least 1");
  }

  double presence_timeout_s() const { return beacon_interval_s * presence_timeout_beacons; }
};

struct ControlStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_loss = 0;
  std::uint64_t dropped_range = 0;

  std::uint64_t dropped() const noexcept { return dropped_loss + dropped_range; }
};

class ControlChannel {
 public:
  explicit ControlChannel(ControlConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const ControlConfig& config() const noexcept { return cfg_; }
  const ControlStats& stats() const noexcept { return stats_; }

  /// Delivery time for a message sent now, or nullopt if it is lost. Equal
  /// delivery times keep send order because the event queue breaks ties by
  /// insertion.
  template <typename Rng>
  std::optional<double> schedule(const std::string& from, const std::string& to, double send_true_time_s,
                                 double separation_m, Rng& rng) {
    ++stats_.sent;
    if (separation_m > cfg_.radio_range_m) {
      ++stats_.dropped_range;
      return std::nullopt;
    }
    // Draw both variates unconditionally so loss settings do not shift the stream.
    const double u_loss = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double u_lat = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u_loss < cfg_.loss_probability) {
      ++stats_.dropped_loss;
      return std::nullopt;
    }
    double at = send_true_time_s + cfg_.latency_min_s + u_lat * (cfg_.latency_max_s - cfg_.latency_min_s);
    auto& last = last_delivery_[{from, to}];
    at = std::max(at, last);
    last = at;
    ++stats_.delivered;
    return at;
  }

 private:
  ControlConfig cfg_;
  ControlStats stats_;
  std::map<std::pair<std::string, std::string>, double> last_delivery_;
};

}  // namespace sonicdist::sim
