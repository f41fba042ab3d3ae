// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sonicdist/dsp/pulse.hpp"
#include "sonicdist/sim/channel.hpp"
#include "sonicdist/sim/control.hpp"
#include "sonicdist/sim/mic.hpp"
#include "sonicdist/sim/trajectory.hpp"
#include "sonicdist/sim/world.hpp"

namespace sim = sonicdist::sim;
namespace ranging = sonicdist::ranging;
namespace dsp = sonicdist::dsp;
using sonicdist::Vec3;

namespace {

sim::DeviceSpec device(const std::string& id, Vec3 p, ranging::DeviceClock clock = {}) {
  sim::DeviceSpec d;
  d.id = id;
  d.clock = clock;
  d.trajectory = sim::Trajectory::stationary(p);
  return d;
}

sim::WorldConfig pair_world(double sep, ranging::DeviceClock ca = {}, ranging::DeviceClock cb = {}) {
  sim::WorldConfig w;
  w.devices = {device("A", {0, 0, 1}, ca), device("B", {sep, 0, 1}, cb)};
  return w;
}

std::vector<sim::EstimateRecord> run(sim::WorldConfig cfg, double until) {
  sim::World world(std::move(cfg));
  return world.advance(until).estimates;
}

}  // namespace

TEST(Trajectory, InterpolatesAndClamps) {
  sim::Trajectory tr{{{1.0, {0, 0, 0}}, {3.0, {4, 0, 0}}}};
  tr.validate();
  EXPECT_EQ(sim::position_at(tr, 0.0).x, 0.0);
  EXPECT_DOUBLE_EQ(sim::position_at(tr, 2.0).x, 2.0);
  EXPECT_EQ(sim::position_at(tr, 9.0).x, 4.0);
  EXPECT_DOUBLE_EQ(tr.max_speed_mps(), 2.0);
}

TEST(Trajectory, RejectsBadWaypoints) {
  EXPECT_THROW(sim::Trajectory{}.validate(), sonicdist::InvalidArgument);
  sim::Trajectory same_time{{{1.0, {}}, {1.0, {1, 0, 0}}}};
  EXPECT_THROW(same_time.validate(), sonicdist::InvalidArgument);
}

TEST(Propagate, DirectDelayIsDistanceOverC) {
  const auto arr = sim::propagate(sim::AcousticLink{}, sim::Trajectory::stationary({0, 0, 0}),
                                  sim::Trajectory::stationary({2, 0, 0}), 0.0, {});
  ASSERT_EQ(arr.size(), 1u);
  EXPECT_NEAR(arr[0].true_time_s, 2.0 / 343.0, 1e-12);
  EXPECT_NEAR(arr[0].true_time_s, 5.831e-3, 1e-6);
  EXPECT_NEAR(arr[0].gain, 0.5, 1e-12);
}

TEST(Propagate, TotalObstructionKeepsOnlyReflections) {
  sim::AcousticLink link;
  link.paths.push_back({sim::PathKind::reflected, 1.5, 0.5});
  link.obstruction = {sim::ObstructionKind::total, 0.0};
  link.validate();
  const auto arr = sim::propagate(link, sim::Trajectory::stationary({0, 0, 0}),
                                  sim::Trajectory::stationary({2, 0, 0}), 0.0, {});
  ASSERT_EQ(arr.size(), 1u);
  EXPECT_EQ(arr[0].kind, sim::PathKind::reflected);
  EXPECT_NEAR(arr[0].true_time_s, 3.5 / 343.0, 1e-12);
}

TEST(Propagate, PartialObstructionAttenuatesDirectOnly) {
  sim::AcousticLink link;
  link.paths.push_back({sim::PathKind::reflected, 1.0, 0.5});
  link.obstruction = {sim::ObstructionKind::partial, 20.0};
  const auto arr = sim::propagate(link, sim::Trajectory::stationary({0, 0, 0}),
                                  sim::Trajectory::stationary({1, 0, 0}), 0.0, {});
  ASSERT_EQ(arr.size(), 2u);
  EXPECT_NEAR(arr[0].gain, 0.1, 1e-12);
  EXPECT_NEAR(arr[1].gain, 0.25, 1e-12);
}

TEST(Propagate, MovingReceiverIsCaughtInFlight) {
  // Receiver recedes at 10 m/s from 1 m: arrival t solves 343 t = 1 + 10 t.
  sim::Trajectory rx{{{0.0, {1, 0, 0}}, {1.0, {11, 0, 0}}}};
  const auto arr = sim::propagate(sim::AcousticLink{}, sim::Trajectory::stationary({0, 0, 0}), rx, 0.0, {});
  EXPECT_NEAR(arr[0].true_time_s, 1.0 / 333.0, 1e-9);
}

TEST(AcousticLink, Validation) {
  sim::AcousticLink strong_echo;
  strong_echo.paths.push_back({sim::PathKind::reflected, 1.0, 1.0});
  strong_echo.paths[0].gain_factor = 0.5;
  EXPECT_THROW(strong_echo.validate(), sonicdist::InvalidArgument);
  strong_echo.obstruction = {sim::ObstructionKind::partial, 10.0};
  EXPECT_NO_THROW(strong_echo.validate());

  sim::AcousticLink zero_extra;
  zero_extra.paths.push_back({sim::PathKind::reflected, 0.0, 0.5});
  EXPECT_THROW(zero_extra.validate(), sonicdist::InvalidArgument);
}

TEST(Wall, Crossing) {
  const sim::Wall w{{1, -1, 0}, {1, 1, 0}};
  EXPECT_TRUE(sim::crosses(w, {0, 0, 1}, {2, 0, 1}));
  EXPECT_FALSE(sim::crosses(w, {0, 0, 1}, {0.9, 0, 1}));
  EXPECT_FALSE(sim::crosses(w, {0, 2, 1}, {2, 2, 1}));
}

TEST(Control, DegenerateLatencyIsExact) {
  sim::ControlConfig cfg;
  cfg.latency_min_s = cfg.latency_max_s = 0.02;
  sim::ControlChannel ch(cfg);
  std::mt19937_64 rng(1);
  const auto at = ch.schedule("A", "B", 1.0, 1.0, rng);
  ASSERT_TRUE(at);
  EXPECT_DOUBLE_EQ(*at, 1.02);
}

TEST(Control, CertainLossDeliversNothing) {
  sim::ControlConfig cfg;
  cfg.loss_probability = 1.0;
  sim::ControlChannel ch(cfg);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_FALSE(ch.schedule("A", "B", i * 0.1, 1.0, rng));
  EXPECT_EQ(ch.stats().dropped_loss, 50u);
}

TEST(Control, OutOfRangeIsDropped) {
  sim::ControlChannel ch({});
  std::mt19937_64 rng(1);
  EXPECT_FALSE(ch.schedule("A", "B", 0.0, 31.0, rng));
  EXPECT_EQ(ch.stats().dropped_range, 1u);
}

TEST(Control, PerLinkDeliveryIsFifo) {
  sim::ControlChannel ch({});
  std::mt19937_64 rng(5);
  double last = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto at = ch.schedule("A", "B", i * 1e-3, 1.0, rng);
    ASSERT_TRUE(at);
    EXPECT_GE(*at, last);
    EXPECT_GE(*at, i * 1e-3 + 0.01);
    last = *at;
  }
}

TEST(Mic, RendersArrivalAtFractionalPosition) {
  dsp::PulseTemplate tpl;
  const auto pulse = dsp::synthesize_pulse(tpl);
  const dsp::OversampledSignal sig(pulse.samples);
  sim::MicStream mic(tpl.sample_rate_hz, {}, 0.0, 1, 4096);
  const double t = 1000.0 / tpl.sample_rate_hz;
  mic.add_arrival(sig, tpl.sample_rate_hz, t, 0.5);
  const auto blk = mic.render_block();
  double worst = 0.0;
  for (std::size_t i = 0; i < pulse.samples.size(); ++i)
    worst = std::max(worst, std::abs(blk.samples[1000 + i] - 0.5 * pulse.samples[i]));
  EXPECT_LT(worst, 1e-4);
  EXPECT_NEAR(blk.samples[999], 0.0, 1e-12);
}

TEST(Mic, SamplePositionIgnoresOffset) {
  const sim::MicStream a(48000, {0.0, 12.0}, 0.0, 1, 2048);
  const sim::MicStream b(48000, {-777.0, 12.0}, 0.0, 1, 2048);
  EXPECT_EQ(a.sample_position(3.21), b.sample_position(3.21));
}

TEST(World, NoiselessPairIsCentimetreAccurate) {
  const auto est = run(pair_world(1.5), 3.0);
  ASSERT_GE(est.size(), 8u);
  for (const auto& e : est) EXPECT_NEAR(e.est_m, 1.5, 0.01);
}

TEST(World, FirstEstimateArrivesQuickly) {
  const auto est = run(pair_world(1.0), 0.9);
  ASSERT_FALSE(est.empty());
  EXPECT_NEAR(est.front().est_m, 1.0, 0.01);
}

TEST(World, ClockOffsetsCancel) {
  const auto ref = run(pair_world(1.2, {0, 30}, {0, -20}), 2.5);
  const auto off = run(pair_world(1.2, {500, 30}, {-500, -20}), 2.5);
  ASSERT_EQ(ref.size(), off.size());
  ASSERT_FALSE(ref.empty());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(ref[i].est_m, off[i].est_m, 1e-3);
}

TEST(World, SameSeedSameEstimates) {
  auto cfg = pair_world(1.7);
  for (auto& d : cfg.devices) {
    d.noise_rms = 0.01;
    d.emission_jitter_s = 3e-4;
  }
  const auto a = run(cfg, 3.0), b = run(cfg, 3.0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].est_m, b[i].est_m);
  cfg.seed = 2;
  const auto c = run(cfg, 3.0);
  ASSERT_FALSE(c.empty());
  EXPECT_NE(a.front().est_m, c.front().est_m);
}

TEST(World, TotalObstructionGivesNoEstimates) {
  auto cfg = pair_world(1.0);
  sim::LinkSpec l{"A", "B", {}};
  l.link.obstruction = {sim::ObstructionKind::total, 0.0};
  cfg.links.push_back(l);
  sim::World world(cfg);
  const auto& obs = world.advance(5.0);
  EXPECT_TRUE(obs.estimates.empty());
  EXPECT_TRUE(obs.alerts.empty());
}

TEST(World, WallBlocksLikeTotalObstruction) {
  auto cfg = pair_world(1.0);
  cfg.walls.push_back({{0.5, -3, 0}, {0.5, 3, 0}});
  EXPECT_TRUE(run(cfg, 5.0).empty());
}

TEST(World, BlockedDirectPathOvershootsByExtraLength) {
  auto cfg = pair_world(1.0);
  sim::LinkSpec l{"A", "B", {}};
  l.link.paths.push_back({sim::PathKind::reflected, 0.8, 0.6});
  l.link.obstruction = {sim::ObstructionKind::total, 0.0};
  cfg.links.push_back(l);
  const auto est = run(cfg, 3.0);
  ASSERT_FALSE(est.empty());
  for (const auto& e : est) EXPECT_NEAR(e.est_m, 1.8, 0.01);
}

TEST(World, CloseNeighboursAlert) {
  sim::World world(pair_world(1.0));
  const auto& obs = world.advance(2.0);
  std::set<std::string> alerted;
  for (const auto& a : obs.alerts) alerted.insert(a.device);
  EXPECT_EQ(alerted, (std::set<std::string>{"A", "B"}));
}

TEST(World, FourDeviceCliqueUsesFourSlots) {
  sim::WorldConfig cfg;
  cfg.devices = {device("A", {0, 0, 1}), device("B", {2.25, 0, 1}), device("C", {0, 2.25, 1}),
                 device("D", {2.25, 2.25, 1})};
  sim::World world(cfg);
  world.advance(2.0);
  for (const auto& id : {"A", "B", "C", "D"}) {
    const auto s = world.view_schedule(id);
    EXPECT_LE(s.frame_length, 4u);
    EXPECT_EQ(s.slot_assignment.size(), 4u);
  }
}

TEST(World, LeaverIsDroppedFromSchedules) {
  sim::WorldConfig cfg;
  cfg.devices = {device("A", {0, 0, 1}), device("B", {1, 0, 1}), device("C", {0, 1, 1})};
  cfg.devices[2].leave_s = 2.0;
  sim::World world(cfg);
  world.advance(1.9);
  EXPECT_TRUE(world.view_schedule("A").slot_assignment.contains("C"));
  const auto& obs = world.advance(6.0);
  EXPECT_FALSE(world.view_schedule("A").slot_assignment.contains("C"));
  EXPECT_EQ(world.view_schedule("A").frame_length, 2u);
  for (const auto& e : obs.estimates)
    if (e.observer == "C" || e.neighbor == "C") { EXPECT_LT(e.true_time_s, 2.5); }
}

TEST(World, LateJoinerIsScheduled) {
  sim::WorldConfig cfg;
  cfg.devices = {device("A", {0, 0, 1}), device("B", {1, 0, 1}), device("C", {0, 1, 1})};
  cfg.devices[2].join_s = 3.0;
  sim::World world(cfg);
  world.advance(2.9);
  EXPECT_FALSE(world.view_schedule("A").slot_assignment.contains("C"));
  const auto& obs = world.advance(6.0);
  EXPECT_TRUE(world.view_schedule("A").slot_assignment.contains("C"));
  EXPECT_TRUE(std::any_of(obs.estimates.begin(), obs.estimates.end(),
                          [](const auto& e) { return e.observer == "C" && std::abs(e.est_m - 1.0) < 0.01; }));
}

TEST(World, AdvancingBackwardsThrows) {
  sim::World world(pair_world(1.0));
  world.advance(1.0);
  EXPECT_THROW(world.advance(0.5), sonicdist::SimulationError);
}

TEST(World, RejectsInvalidConfig) {
  auto cfg = pair_world(1.0);
  cfg.devices[1].id = "A";
  EXPECT_THROW(sim::World{cfg}, sonicdist::InvalidArgument);
  cfg = pair_world(1.0);
  cfg.devices[0].sample_rate_hz = 22050;
  EXPECT_THROW(sim::World{cfg}, sonicdist::InvalidArgument);
  cfg = pair_world(1.0);
  cfg.pulse_lead_s = 0.02;
  EXPECT_THROW(sim::World{cfg}, sonicdist::InvalidArgument);
}

// Multipath can lengthen an estimate but never shorten it.
TEST(WorldProperty, EstimatesNeverUndershootDirectPath) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double sep = 0.5 + 2.5 * u(rng);
    auto cfg = pair_world(sep, {u(rng) * 100, (u(rng) - 0.5) * 40}, {u(rng) * 100, (u(rng) - 0.5) * 40});
    cfg.seed = trial;
    sim::LinkSpec l{"A", "B", {}};
    l.link.paths.push_back({sim::PathKind::reflected, 0.35 + 6.5 * u(rng), 0.2 + 0.8 * u(rng)});
    l.link.obstruction = {sim::ObstructionKind::partial, 20.0 * u(rng)};
    cfg.links.push_back(l);
    for (auto& d : cfg.devices) d.noise_rms = 0.002;
    const auto est = run(cfg, 2.0);
    ASSERT_FALSE(est.empty()) << "trial " << trial;
    for (const auto& e : est) EXPECT_GE(e.est_m, e.true_m - 0.01) << "trial " << trial;
  }
}
