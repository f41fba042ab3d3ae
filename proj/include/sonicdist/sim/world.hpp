// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "sonicdist/dsp/detector.hpp"
#include "sonicdist/dsp/pulse.hpp"
#include "sonicdist/error.hpp"
#include "sonicdist/mac/conflict_graph.hpp"
#include "sonicdist/mac/schedule.hpp"
#include "sonicdist/ranging/clock.hpp"
#include "sonicdist/ranging/neighbors.hpp"
#include "sonicdist/ranging/round.hpp"
#include "sonicdist/sim/channel.hpp"
#include "sonicdist/sim/control.hpp"
#include "sonicdist/sim/mic.hpp"
#include "sonicdist/sim/trajectory.hpp"

namespace sonicdist::sim {

struct DeviceSpec {
  std::string id;
  double sample_rate_hz = 48000.0;
  ranging::DeviceClock clock;
  Trajectory trajectory = Trajectory::stationary({});
  double noise_rms = 0.0;
  /// Std-dev of the speaker's start time as heard by others, relative to the
  /// self-pulse the emitter records.
  double emission_jitter_s = 0.0;
  double join_s = 0.0;
  std::optional<double> leave_s;
  bool record_audio = false;
};

struct LinkSpec {
  std::string a;
  std::string b;
  AcousticLink link;
};

struct WorldConfig {
  std::vector<DeviceSpec> devices;
  std::vector<LinkSpec> links;
  std::vector<Wall> walls;
  ranging::RangingConfig ranging;
  ControlConfig control;
  PropagationModel propagation;
  dsp::PulseTemplate pulse;  // sample rate is replaced per device
  dsp::DetectorConfig detector;
  double slot_duration_s = 0.2;
  /// Delay from slot start (when the announcement goes out) to the pulse.
  double pulse_lead_s = 0.04;
  double self_gain = 1.0;
  /// Time after joining before a device takes part in the schedule.
  double discovery_s = 0.2;
  /// Rounds whose two pulses lie further apart than this are not evaluated.
  double max_round_span_s = 2.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (devices.empty()) throw InvalidArgument("world: no devices");
    std::set<std::string> ids;
    for (const auto& d : devices) {
      if (d.id.empty()) throw InvalidArgument("world: empty device id");
      if (!ids.insert(d.id).second) throw InvalidArgument("world: duplicate device id " + d.id);
      if (d.sample_rate_hz != 44100.0 && d.sample_rate_hz != 48000.0)
        throw InvalidArgument("world: device " + d.id + " sample rate must be 44100 or 48000");
      d.trajectory.validate();
      if (!(d.noise_rms >= 0.0) || !(d.emission_jitter_s >= 0.0))
        throw InvalidArgument("world: device " + d.id + " has negative noise or jitter");
      if (!(d.join_s >= 0.0)) throw InvalidArgument("world: device " + d.id + " joins before time 0");
      if (d.leave_s && !(*d.leave_s > d.join_s)) throw InvalidArgument("world: device " + d.id + " leaves before joining");
      if (!(std::abs(d.clock.drift_ppm) < 1e4)) throw InvalidArgument("world: device " + d.id + " drift out of range");
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& l : links) {
      if (!ids.contains(l.a) || !ids.contains(l.b)) throw InvalidArgument("world: link references unknown device");
      if (l.a == l.b) throw InvalidArgument("world: link from a device to itself");
      if (!seen.insert(std::minmax(l.a, l.b)).second) throw InvalidArgument("world: duplicate link " + l.a + "-" + l.b);
      l.link.validate();
    }
    ranging.validate();
    control.validate();
    if (!(slot_duration_s > 0.0)) throw InvalidArgument("world: slot duration must be positive");
    if (!(pulse_lead_s > control.latency_max_s))
      throw InvalidArgument("world: pulse lead must exceed the maximum control latency");
    if (!(pulse_lead_s + 2.0 * pulse.segment_duration_s + pulse.gap_duration_s < slot_duration_s))
      throw InvalidArgument("world: pulse does not fit in a slot");
    if (!(max_round_span_s > 0.0) || !(discovery_s >= 0.0) || !(self_gain > 0.0))
      throw InvalidArgument("world: non-positive timing or gain parameter");
  }
};

/// One distance estimate as produced by `observer`, with ground truth attached.
struct EstimateRecord {
  double true_time_s = 0.0;
  std::string observer;
  std::string neighbor;
  std::int64_t observer_slot = 0;
  std::int64_t neighbor_slot = 0;
  double true_m = 0.0;  // at the midpoint of the two pulses
  double est_m = 0.0;
};

/// A device switching from clear to alerting.
struct AlertRecord {
  double true_time_s = 0.0;
  std::string device;
  std::string neighbor;
  double true_m = 0.0;
  double est_m = 0.0;
};

struct WorldCounters {
  std::uint64_t pulses_emitted = 0;
  std::uint64_t expected_receptions = 0;  // announcements seen, own included
  std::uint64_t attributed_receptions = 0;
  std::uint64_t unattributed_detections = 0;
  std::uint64_t implausible_estimates = 0;
  std::uint64_t inconsistent_rounds = 0;
};

struct Observations {
  std::vector<EstimateRecord> estimates;
  std::vector<AlertRecord> alerts;
  std::vector<AlertRecord> alert_clears;
  WorldCounters counters;
  ControlStats control;
};

namespace msg {
struct Prep {
  std::string emitter;
  std::int64_t slot = 0;
};
struct Timestamp {
  std::string observer;
  std::string emitter;
  std::int64_t slot = 0;
  ranging::Picoseconds local_ps = 0;
};
/// Link-state report: the origin's current radio neighbours.
struct Beacon {
  std::string origin;
  std::uint64_t version = 0;
  std::set<std::string> neighbors;
};
struct Leave {
  std::string origin;
};
using Any = std::variant<Prep, Timestamp, Beacon, Leave>;
}  // namespace msg

/// Deterministic discrete-event world. Slot boundaries run on true time,
/// standing in for a slot clock shared over the radio link.
class World {
 public:
  explicit World(WorldConfig cfg) : cfg_(std::move(cfg)), control_(cfg_.control) {
    cfg_.validate();
    std::seed_seq root{cfg_.seed, std::uint64_t{0x5d15}};
    control_rng_.seed(root);
    for (const auto& l : cfg_.links) links_[std::minmax(l.a, l.b)] = l.link;
    for (std::size_t i = 0; i < cfg_.devices.size(); ++i) {
      const auto& spec = cfg_.devices[i];
      index_[spec.id] = i;
      std::seed_seq noise_seed{cfg_.seed, std::uint64_t{i}, std::uint64_t{1}};
      std::seed_seq dev_seed{cfg_.seed, std::uint64_t{i}, std::uint64_t{2}};
      std::mt19937_64 ns(noise_seed);
      auto tpl = cfg_.pulse;
      tpl.sample_rate_hz = spec.sample_rate_hz;
      auto dev = std::make_unique<Device>(
          spec, MicStream(spec.sample_rate_hz, spec.clock, spec.noise_rms, ns(), cfg_.detector.block_samples),
          dsp::StreamDetector(dsp::MatchedFilter::shared(tpl, cfg_.detector.block_samples), cfg_.detector,
                              spec.clock.offset_s));
      dev->rng.seed(dev_seed);
      if (!waveforms_.contains(spec.sample_rate_hz)) waveforms_.emplace(spec.sample_rate_hz, pulse_signal(tpl));
      devices_.push_back(std::move(dev));
      push({spec.join_s, Kind::join, i});
      if (spec.leave_s) push({*spec.leave_s, Kind::leave, i});
      push({devices_.back()->mic.next_block_ready_true_s(), Kind::block_ready, i});
    }
    push({0.0, Kind::slot_start, 0, 0});
  }

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  const WorldConfig& config() const noexcept { return cfg_; }
  double now() const noexcept { return now_; }

  /// Processes every event due at or before `until_true_time_s`.
  const Observations& advance(double until_true_time_s) {
    if (until_true_time_s < now_) throw SimulationError("world: advance to a time before the current time");
    while (!queue_.empty() && queue_.top().time <= until_true_time_s) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time < now_) throw SimulationError("world: event queue went backwards in time");
      now_ = ev.time;
      dispatch(ev);
    }
    now_ = until_true_time_s;
    obs_.control = control_.stats();
    return obs_;
  }

  const Observations& observations() const noexcept { return obs_; }

  double true_distance(const std::string& a, const std::string& b, double t) const {
    return distance(position_at(spec(a).trajectory, t), position_at(spec(b).trajectory, t));
  }

  /// Captured microphone samples of a device with `record_audio` set.
  const std::vector<double>& recorded_audio(const std::string& id) const { return devices_.at(at(id))->audio; }

  /// Slot assignment as currently seen by one device.
  mac::SlotSchedule view_schedule(const std::string& id) const { return schedule_of(*devices_.at(at(id))); }

 private:
  enum class Kind { slot_start, emission, block_ready, delivery, beacon, join, leave };

  struct Event {
    double time = 0.0;
    Kind kind = Kind::slot_start;
    std::size_t device = 0;
    std::int64_t slot = 0;
    std::string from;
    msg::Any message;
    std::uint64_t seq = 0;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  struct LinkState {
    std::uint64_t version = 0;
    std::set<std::string> neighbors;
    double refreshed_s = 0.0;
  };
  struct PrepSeen {
    double local_s = 0.0;
    std::string emitter;
    std::int64_t slot = 0;
    bool attributed = false;
  };

  struct Device {
    Device(const DeviceSpec& s, MicStream m, dsp::StreamDetector d) : spec(s), mic(std::move(m)), detector(std::move(d)) {}
    const DeviceSpec& spec;
    MicStream mic;
    dsp::StreamDetector detector;
    std::mt19937_64 rng;
    bool present = false;
    double ready_s = 0.0;
    std::uint64_t version = 0;
    std::map<std::string, double> heard;  // direct radio neighbours, last heard
    std::map<std::string, LinkState> lsdb;
    std::deque<PrepSeen> preps;
    // emitter -> slot -> observer -> local timestamp
    std::map<std::string, std::map<std::int64_t, std::map<std::string, ranging::Picoseconds>>> stamps;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> last_round;
    ranging::NeighborTable table;
    bool alerting = false;
    std::vector<double> audio;
  };

  static std::shared_ptr<const dsp::OversampledSignal> pulse_signal(const dsp::PulseTemplate& tpl) {
    static std::mutex mutex;
    static std::map<std::tuple<double, double, double, double, double, double>,
                    std::shared_ptr<const dsp::OversampledSignal>>
        cache;
    const auto key = std::make_tuple(tpl.f1_hz, tpl.f2_hz, tpl.segment_duration_s, tpl.gap_duration_s,
                                     tpl.sample_rate_hz, tpl.window_shape_param);
    std::lock_guard lock(mutex);
    auto& slot = cache[key];
    if (!slot) slot = std::make_shared<const dsp::OversampledSignal>(dsp::synthesize_pulse(tpl).samples);
    return slot;
  }

  std::size_t at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw InvalidArgument("world: unknown device " + id);
    return it->second;
  }
  const DeviceSpec& spec(const std::string& id) const { return cfg_.devices[at(id)]; }
  double local(const Device& d, double t) const { return ranging::local_time(d.spec.clock, t); }

  void push(Event ev) {
    if (ev.time < now_) throw SimulationError("world: event scheduled in the past");
    ev.seq = next_seq_++;
    queue_.push(std::move(ev));
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Kind::slot_start: on_slot(ev.slot); break;
      case Kind::emission: on_emission(ev.device, ev.slot); break;
      case Kind::block_ready: on_block(ev.device); break;
      case Kind::delivery: on_delivery(ev.device, ev.from, ev.message); break;
      case Kind::beacon: on_beacon_timer(ev.device); break;
      case Kind::join: on_join(ev.device); break;
      case Kind::leave: on_leave(ev.device); break;
    }
  }

  /// Radio broadcast to every present device in range. Known peers out of
  /// range count as range drops.
  void broadcast(std::size_t from, const msg::Any& m) {
    const auto& src = *devices_[from];
    for (std::size_t r = 0; r < devices_.size(); ++r) {
      if (r == from || !devices_[r]->present) continue;
      const auto& dst = devices_[r]->spec.id;
      const double sep = true_distance(src.spec.id, dst, now_);
      if (sep > cfg_.control.radio_range_m && !src.lsdb.contains(dst)) continue;
      if (const auto when = control_.schedule(src.spec.id, dst, now_, sep, control_rng_)) {
        Event ev{*when, Kind::delivery, r};
        ev.from = src.spec.id;
        ev.message = m;
        push(std::move(ev));
      }
    }
  }

  // --- membership and link state -------------------------------------------------

  void announce(std::size_t i) {
    auto& d = *devices_[i];
    std::set<std::string> nbrs;
    for (const auto& [id, t] : d.heard) nbrs.insert(id);
    d.lsdb[d.spec.id] = {++d.version, nbrs, now_};
    broadcast(i, msg::Beacon{d.spec.id, d.version, std::move(nbrs)});
  }

  void on_join(std::size_t i) {
    auto& d = *devices_[i];
    d.present = true;
    d.ready_s = now_ + cfg_.discovery_s;
    announce(i);
    push({now_ + cfg_.control.beacon_interval_s, Kind::beacon, i});
  }

  void on_leave(std::size_t i) {
    auto& d = *devices_[i];
    if (!d.present) return;
    broadcast(i, msg::Leave{d.spec.id});
    d.present = false;
    if (d.alerting) obs_.alert_clears.push_back({now_, d.spec.id, {}, 0.0, 0.0});
    d.alerting = false;
  }

  void drop_peer(Device& d, const std::string& id) {
    d.lsdb.erase(id);
    d.heard.erase(id);
    d.table = ranging::forget_neighbor(std::move(d.table), id);
    d.last_round.erase(id);
    d.stamps.erase(id);
  }

  void on_beacon_timer(std::size_t i) {
    auto& d = *devices_[i];
    if (!d.present) return;
    const double timeout = cfg_.control.presence_timeout_s();
    std::erase_if(d.heard, [&](const auto& kv) { return now_ - kv.second > timeout; });
    std::vector<std::string> stale;
    for (const auto& [id, ls] : d.lsdb)
      if (id != d.spec.id && now_ - ls.refreshed_s > timeout) stale.push_back(id);
    for (const auto& id : stale) drop_peer(d, id);
    announce(i);
    push({now_ + cfg_.control.beacon_interval_s, Kind::beacon, i});
  }

  void on_delivery(std::size_t i, const std::string& from, const msg::Any& m) {
    auto& d = *devices_[i];
    if (!d.present) return;
    const bool new_neighbor = !d.heard.contains(from);
    d.heard[from] = now_;
    if (const auto* b = std::get_if<msg::Beacon>(&m)) {
      if (b->origin != d.spec.id) {
        auto it = d.lsdb.find(b->origin);
        if (it == d.lsdb.end() || it->second.version < b->version) {
          d.lsdb[b->origin] = {b->version, b->neighbors, now_};
          d.table = ranging::register_connected(std::move(d.table), b->origin);
          broadcast(i, *b);
        }
      }
    } else if (const auto* l = std::get_if<msg::Leave>(&m)) {
      if (d.lsdb.contains(l->origin)) {
        drop_peer(d, l->origin);
        broadcast(i, *l);
        announce(i);
      }
      return;
    } else if (const auto* p = std::get_if<msg::Prep>(&m)) {
      d.preps.push_back({local(d, now_), p->emitter, p->slot, false});
      ++obs_.counters.expected_receptions;
    } else if (const auto* ts = std::get_if<msg::Timestamp>(&m)) {
      if (ts->emitter == d.spec.id || ts->observer != d.spec.id) {
        d.stamps[ts->emitter][ts->slot][ts->observer] = ts->local_ps;
        try_rounds(i);
      }
    }
    if (new_neighbor) announce(i);
  }

  /// Conflict view from link state: devices that share a radio link are
  /// treated as able to hear each other.
  mac::SlotSchedule schedule_of(const Device& d) const {
    mac::AudioRange range;
    for (const auto& [id, ls] : d.lsdb) range.add_device(id);
    for (const auto& [id, ls] : d.lsdb)
      for (const auto& n : ls.neighbors)
        if (d.lsdb.contains(n) && n != id) range.connect(id, n);
    return mac::assign_slots(mac::build_conflict_graph(range), cfg_.slot_duration_s);
  }

  // --- slots, pulses, audio -------------------------------------------------------

  void on_slot(std::int64_t k) {
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      auto& d = *devices_[i];
      if (!d.present) continue;
      prune(d);
      refresh_alert(i);
      if (now_ + 1e-9 < d.ready_s) continue;
      const auto sched = schedule_of(d);
      const auto mine = sched.slot_assignment.find(d.spec.id);
      if (mine == sched.slot_assignment.end() ||
          static_cast<std::size_t>(k) % sched.frame_length != mine->second)
        continue;
      d.preps.push_back({local(d, now_), d.spec.id, k, false});
      ++obs_.counters.expected_receptions;
      broadcast(i, msg::Prep{d.spec.id, k});
      push({now_ + cfg_.pulse_lead_s, Kind::emission, i, k});
    }
    push({static_cast<double>(k + 1) * cfg_.slot_duration_s, Kind::slot_start, 0, k + 1});
  }

  AcousticLink link_between(std::size_t a, std::size_t b, double t) const {
    const auto& ia = cfg_.devices[a].id;
    const auto& ib = cfg_.devices[b].id;
    const auto it = links_.find(std::minmax(ia, ib));
    AcousticLink link = it == links_.end() ? AcousticLink{} : it->second;
    const Vec3 pa = position_at(cfg_.devices[a].trajectory, t), pb = position_at(cfg_.devices[b].trajectory, t);
    for (const auto& w : cfg_.walls)
      if (crosses(w, pa, pb)) link.obstruction = {ObstructionKind::total, 0.0};
    return link;
  }

  void on_emission(std::size_t i, std::int64_t k) {
    auto& d = *devices_[i];
    if (!d.present) return;
    ++obs_.counters.pulses_emitted;
    emitted_[{i, k}] = now_;
    const auto& wave = *waveforms_.at(d.spec.sample_rate_hz);
    d.mic.add_arrival(wave, d.spec.sample_rate_hz, now_, cfg_.self_gain);
    const double jitter =
        d.spec.emission_jitter_s > 0.0 ? std::normal_distribution<double>(0.0, d.spec.emission_jitter_s)(d.rng) : 0.0;
    for (std::size_t r = 0; r < devices_.size(); ++r) {
      if (r == i) continue;
      const auto arrivals = propagate(link_between(i, r, now_), d.spec.trajectory, devices_[r]->spec.trajectory,
                                      now_ + jitter, cfg_.propagation);
      for (const auto& a : arrivals) devices_[r]->mic.add_arrival(wave, d.spec.sample_rate_hz, a.true_time_s, a.gain);
    }
  }

  void on_block(std::size_t i) {
    auto& d = *devices_[i];
    const auto block = d.mic.render_block();
    if (d.spec.record_audio) d.audio.insert(d.audio.end(), block.samples.begin(), block.samples.end());
    const auto events = d.detector.push(block.samples);
    if (d.present)
      for (const auto& e : events) on_detection(i, e);
    push({d.mic.next_block_ready_true_s(), Kind::block_ready, i});
  }

  void on_detection(std::size_t i, const dsp::DetectionEvent& e) {
    auto& d = *devices_[i];
    // An announced pulse leaves the speaker pulse_lead after the slot start and
    // arrives within the plausible flight time.
    const double slack = 1e-3;
    const double earliest = cfg_.pulse_lead_s - cfg_.control.latency_max_s - slack;
    const double latest = cfg_.pulse_lead_s - cfg_.control.latency_min_s +
                          cfg_.ranging.plausible_limit_m() / cfg_.ranging.speed_of_sound_mps + slack;
    PrepSeen* match = nullptr;
    for (auto it = d.preps.rbegin(); it != d.preps.rend(); ++it) {
      if (it->local_s + earliest <= e.arrival_time_s) {
        match = &*it;
        break;
      }
    }
    if (!match || match->attributed || e.arrival_time_s - match->local_s > latest) {
      ++obs_.counters.unattributed_detections;
      return;
    }
    match->attributed = true;
    ++obs_.counters.attributed_receptions;
    const auto ps = ranging::to_picoseconds(e.arrival_time_s);
    d.stamps[match->emitter][match->slot][d.spec.id] = ps;
    broadcast(i, msg::Timestamp{d.spec.id, match->emitter, match->slot, ps});
    try_rounds(i);
  }

  void prune(Device& d) {
    const double horizon = local(d, now_) - cfg_.max_round_span_s - 1.0;
    while (!d.preps.empty() && d.preps.front().local_s < horizon) d.preps.pop_front();
    const auto keep_slots = static_cast<std::int64_t>(std::ceil((cfg_.max_round_span_s + 1.0) / cfg_.slot_duration_s));
    const std::int64_t current = static_cast<std::int64_t>(std::floor(now_ / cfg_.slot_duration_s + 1e-9));
    for (auto& [em, slots] : d.stamps) std::erase_if(slots, [&](const auto& kv) { return kv.first < current - keep_slots; });
  }

  // --- ranging ----------------------------------------------------------------------

  static std::optional<std::int64_t> latest_shared(
      const std::map<std::int64_t, std::map<std::string, ranging::Picoseconds>>& slots, const std::string& a,
      const std::string& b) {
    for (auto it = slots.rbegin(); it != slots.rend(); ++it)
      if (it->second.contains(a) && it->second.contains(b)) return it->first;
    return std::nullopt;
  }

  void try_rounds(std::size_t i) {
    auto& d = *devices_[i];
    const std::string& self = d.spec.id;
    const auto own = d.stamps.find(self);
    if (own == d.stamps.end()) return;
    for (const auto& [other, slots] : d.stamps) {
      if (other == self) continue;
      const auto si = latest_shared(own->second, self, other);
      const auto sj = latest_shared(slots, self, other);
      if (!si || !sj) continue;
      const std::pair key{*si, *sj};
      const auto last = d.last_round.find(other);
      if (last != d.last_round.end() && last->second == key) continue;
      if (static_cast<double>(std::abs(*si - *sj)) * cfg_.slot_duration_s > cfg_.max_round_span_s) continue;
      d.last_round[other] = key;

      const bool self_first = *si < *sj;
      const auto& first_slots = self_first ? own->second.at(*si) : slots.at(*sj);
      const auto& second_slots = self_first ? slots.at(*sj) : own->second.at(*si);
      ranging::RangingRound round;
      round.initiator = self_first ? self : other;
      round.responder = self_first ? other : self;
      round.t_a1 = first_slots.at(round.initiator);
      round.t_c1 = first_slots.at(round.responder);
      round.t_c3 = second_slots.at(round.responder);
      round.t_a3 = second_slots.at(round.initiator);
      double est = 0.0;
      try {
        est = ranging::compute_distance(round, cfg_.ranging);
      } catch (const InconsistentRound&) {
        ++obs_.counters.inconsistent_rounds;
        continue;
      }
      if (est > cfg_.ranging.plausible_limit_m()) {
        ++obs_.counters.implausible_estimates;
        continue;
      }
      const std::size_t j = at(other);
      const double mid = 0.5 * (emitted_.at({i, *si}) + emitted_.at({j, *sj}));
      obs_.estimates.push_back({now_, self, other, *si, *sj, true_distance(self, other, mid), est});
      d.table = ranging::update_neighbor(std::move(d.table), other, est, local(d, now_), cfg_.ranging);
      refresh_alert(i);
    }
  }

  void refresh_alert(std::size_t i) {
    auto& d = *devices_[i];
    const auto decision = ranging::check_alert(d.table, cfg_.ranging, local(d, now_));
    if (decision.alert && !d.alerting)
      obs_.alerts.push_back({now_, d.spec.id, decision.neighbor,
                             true_distance(d.spec.id, decision.neighbor, now_), decision.distance_m});
    if (!decision.alert && d.alerting) obs_.alert_clears.push_back({now_, d.spec.id, {}, 0.0, 0.0});
    d.alerting = decision.alert;
  }

  WorldConfig cfg_;
  ControlChannel control_;
  std::mt19937_64 control_rng_;
  std::map<std::string, std::size_t> index_;
  std::map<std::pair<std::string, std::string>, AcousticLink> links_;
  std::map<double, std::shared_ptr<const dsp::OversampledSignal>> waveforms_;
  std::vector<std::unique_ptr<Device>> devices_;
  std::map<std::pair<std::size_t, std::int64_t>, double> emitted_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  Observations obs_;
};

}  // namespace sonicdist::sim
