// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <random>

#include "sonicdist/dsp/detector.hpp"
#include "sonicdist/dsp/pulse.hpp"
#include "test_support.hpp"

namespace dsp = sonicdist::dsp;
namespace st = sonicdist::testing;

namespace {

dsp::PulseTemplate at_rate(double rate) {
  dsp::PulseTemplate t;
  t.sample_rate_hz = rate;
  return t;
}

dsp::SampleBuffer buffer_of(std::vector<double> samples, double rate) {
  dsp::SampleBuffer b;
  b.samples = std::move(samples);
  b.sample_rate_hz = rate;
  return b;
}

}  // namespace

TEST(Window, SymmetricWithCentrePeak) {
  const auto w = dsp::make_window(480, 0.1);
  ASSERT_EQ(w.size(), 480u);
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_EQ(w[k], w[479 - k]) << k;
  const auto peak = std::max_element(w.begin(), w.end()) - w.begin();
  EXPECT_TRUE(peak == 239 || peak == 240);
  EXPECT_EQ(w[239], w[240]);
  EXPECT_DOUBLE_EQ(w[239], 1.0);
  for (double v : w) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Window, EndpointRatioMatchesClosedForm) {
  // Golden value from an independent numpy evaluation of the confined-Gaussian
  // approximation (N = 440, L = 441, sigma_t = 0.1).
  const auto w = dsp::make_window(441, 0.1);
  const double ratio = w[0] / *std::max_element(w.begin(), w.end());
  EXPECT_NEAR(ratio, 1.0944731264594541e-4, 1e-12);
  EXPECT_LT(ratio, 0.1);
}

TEST(Window, RejectsBadArguments) {
  EXPECT_THROW(dsp::make_window(3, 0.1), sonicdist::InvalidArgument);
  EXPECT_THROW(dsp::make_window(64, 0.0), sonicdist::InvalidArgument);
}

TEST(Pulse, LengthsAtBothRates) {
  EXPECT_EQ(dsp::synthesize_pulse(at_rate(44100)).size(), 1323u);
  const auto p48 = dsp::synthesize_pulse(at_rate(48000));
  EXPECT_EQ(p48.size(), 1440u);
  EXPECT_DOUBLE_EQ(p48.duration_s(), 0.030);
}

TEST(Pulse, GapIsSilentAndPeakIsUnity) {
  for (double rate : {44100.0, 48000.0}) {
    const auto tpl = at_rate(rate);
    const auto p = dsp::synthesize_pulse(tpl);
    const std::size_t seg = tpl.segment_samples();
    for (std::size_t i = seg; i < 2 * seg; ++i) EXPECT_EQ(p.samples[i], 0.0);
    double peak = 0.0;
    for (double v : p.samples) peak = std::max(peak, std::abs(v));
    EXPECT_EQ(peak, 1.0);
  }
}

TEST(Pulse, FirstSegmentSpectralPeakAtF1) {
  const auto tpl = at_rate(48000);
  const auto p = dsp::synthesize_pulse(tpl);
  const std::size_t seg = tpl.segment_samples();
  const auto spec = st::naive_dft(std::span<const double>(p.samples).first(seg));
  std::size_t best = 1;
  for (std::size_t k = 1; k < seg / 2; ++k)
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  const double bin_hz = tpl.sample_rate_hz / static_cast<double>(seg);
  EXPECT_LE(std::abs(static_cast<double>(best) * bin_hz - 18500.0), bin_hz);
}

TEST(Pulse, RejectsInvalidTemplate) {
  auto tpl = at_rate(44100);
  tpl.f2_hz = 23000.0;
  EXPECT_THROW(dsp::synthesize_pulse(tpl), sonicdist::InvalidArgument);
  tpl = at_rate(44100);
  tpl.f1_hz = 19500.0;
  EXPECT_THROW(dsp::synthesize_pulse(tpl), sonicdist::InvalidArgument);
}

TEST(RefineTimestamp, SymmetricPeak) {
  std::vector<double> env(20, 0.0);
  env[9] = 1.0;
  env[10] = 2.0;
  env[11] = 1.0;
  const auto r = dsp::refine_timestamp(env, 10);
  EXPECT_FALSE(r.at_boundary);
  EXPECT_DOUBLE_EQ(r.position, 10.0);
}

TEST(RefineTimestamp, AsymmetricPeakMatchesVertexFormula) {
  std::vector<double> env(20, 0.0);
  env[9] = 1.0;
  env[10] = 2.0;
  env[11] = 1.5;
  // Vertex of the parabola through (-1,1), (0,2), (1,1.5): x = (1 - 1.5) / (2 (1 - 4 + 1.5)) = 1/6.
  const double expected = 10.0 + 1.0 / 6.0;
  const auto r = dsp::refine_timestamp(env, 10);
  EXPECT_NEAR(r.position, expected, 1e-12);
  EXPECT_GT(r.position, 10.0);
  EXPECT_LT(r.position, 10.5);
}

TEST(RefineTimestamp, BoundaryIsFlagged) {
  std::vector<double> env{3.0, 2.0, 1.0};
  EXPECT_TRUE(dsp::refine_timestamp(env, 0).at_boundary);
  EXPECT_TRUE(dsp::refine_timestamp(env, 2).at_boundary);
  EXPECT_EQ(dsp::refine_timestamp(env, 2).position, 2.0);
}

TEST(RefineTimestamp, FractionalDelayOnMatchedFilterEnvelope) {
  const auto tpl = at_rate(44100);
  const auto pulse = dsp::synthesize_pulse(tpl);
  const auto delayed = st::dft_fractional_delay(pulse.samples, 1000.25, 4096);
  const auto mf = dsp::MatchedFilter::shared(tpl, 2048);
  const auto corr = mf->correlate(delayed);
  std::vector<double> env(corr.size());
  for (std::size_t k = 0; k < corr.size(); ++k) env[k] = std::abs(corr[k]);
  const auto coarse = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
  const auto r = dsp::refine_timestamp(env, coarse);
  EXPECT_NEAR(r.position, 1000.25, 0.25);
}

TEST(Detect, NoiselessSelfMatch) {
  for (double rate : {44100.0, 48000.0}) {
    const auto tpl = at_rate(rate);
    const auto pulse = dsp::synthesize_pulse(tpl);
    std::vector<double> x(8000, 0.0);
    st::place(x, pulse.samples, 1000, 1.0);
    auto buf = buffer_of(x, rate);
    buf.origin_time_s = 12.5;
    const auto events = dsp::detect_pulses(buf, tpl);
    ASSERT_EQ(events.size(), 1u) << rate;
    EXPECT_NEAR(events[0].sample_position, 1000.0, 0.5);
    EXPECT_NEAR(events[0].arrival_time_s, 12.5 + 1000.0 / rate, 0.5 / rate);
    EXPECT_NEAR(events[0].peak_amplitude, 1.0, 1e-3);
    EXPECT_GE(events[0].score, dsp::DetectorConfig{}.threshold_k);
  }
}

TEST(Detect, FractionalDelayIsResolved) {
  const auto tpl = at_rate(44100);
  const auto pulse = dsp::synthesize_pulse(tpl);
  const auto delayed = st::dft_fractional_delay(pulse.samples, 1000.25, 4096);
  const auto events = dsp::detect_pulses(buffer_of(delayed, 44100), tpl);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NEAR(events[0].sample_position, 1000.25, 0.25);
}

TEST(Detect, WeakDirectPathBeatsStrongEcho) {
  const auto tpl = at_rate(44100);
  const auto pulse = dsp::synthesize_pulse(tpl);
  std::vector<double> x(6000, 0.0);
  st::place(x, pulse.samples, 1000, 0.01);
  st::place(x, pulse.samples, 1150, 1.0);

  const std::size_t oracle = st::earliest_arrival_oracle(x, pulse.samples, 4, 1e-3);
  ASSERT_EQ(oracle, 1000u);

  const auto events = dsp::detect_pulses(buffer_of(x, 44100), tpl);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NEAR(events[0].sample_position, static_cast<double>(oracle), 0.5);
}

TEST(Detect, AmplitudeInvariance) {
  const auto tpl = at_rate(48000);
  const auto pulse = dsp::synthesize_pulse(tpl);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> base(12000, 0.0);
  for (double& v : base) v = noise(rng);
  st::place(base, pulse.samples, 2100, 0.2);
  st::place(base, pulse.samples, 2400, 0.5);
  st::place(base, pulse.samples, 7000, 0.05);

  std::vector<dsp::DetectionEvent> reference;
  for (double gain : {1.0, 10.0, 1e2, 1e3, 1e4}) {
    auto x = base;
    for (double& v : x) v *= gain;
    const auto events = dsp::detect_pulses(buffer_of(x, 48000), tpl);
    if (reference.empty()) {
      reference = events;
      ASSERT_EQ(reference.size(), 2u);
      continue;
    }
    ASSERT_EQ(events.size(), reference.size()) << gain;
    for (std::size_t i = 0; i < events.size(); ++i)
      EXPECT_NEAR(events[i].sample_position, reference[i].sample_position, 1.0) << gain;
  }
  EXPECT_NEAR(reference[0].sample_position, 2100.0, 0.5);
  EXPECT_NEAR(reference[1].sample_position, 7000.0, 0.5);
}

TEST(Detect, RoundTripRandomOffsets) {
  std::mt19937_64 rng(2024);
  for (double rate : {44100.0, 48000.0}) {
    const auto tpl = at_rate(rate);
    const auto pulse = dsp::synthesize_pulse(tpl);
    std::uniform_int_distribution<std::size_t> offset(0, 20000);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = offset(rng);
      std::vector<double> x(k + pulse.size() + 500, 0.0);
      st::place(x, pulse.samples, k, 1.0);
      const auto events = dsp::detect_pulses(buffer_of(x, rate), tpl);
      ASSERT_EQ(events.size(), 1u) << "rate " << rate << " offset " << k;
      EXPECT_NEAR(events[0].sample_position, static_cast<double>(k), 0.5);
    }
  }
}

TEST(Detect, EarliestArrivalDominanceProperty) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> delay_s(0.001, 0.020);
  std::uniform_real_distribution<double> log_ratio(-1.0, 2.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (double rate : {44100.0, 48000.0}) {
    const auto tpl = at_rate(rate);
    const auto pulse = dsp::synthesize_pulse(tpl);
    const st::DftDelayLine line(pulse.samples, 4096);
    for (int trial = 0; trial < 40; ++trial) {
      const double direct_at = 3000.0 + frac(rng);
      const double echo_at = direct_at + delay_s(rng) * rate;
      const double ratio = std::pow(10.0, log_ratio(rng));  // echo / direct, up to 100
      std::vector<double> x(8192, 0.0);
      const std::pair<double, double> paths[] = {{direct_at - 2000.0, 1.0}, {echo_at - 2000.0, ratio}};
      const auto y = line.render(paths);
      for (std::size_t i = 0; i < y.size(); ++i) x[2000 + i] += y[i];
      const auto events = dsp::detect_pulses(buffer_of(x, rate), tpl);
      ASSERT_FALSE(events.empty());
      EXPECT_NEAR(events[0].sample_position, direct_at, 0.5)
          << "rate " << rate << " delay " << (echo_at - direct_at) << " ratio " << ratio;
      EXPECT_EQ(events.size(), 1u);
    }
  }
}

TEST(Detect, DeterministicOutput) {
  const auto tpl = at_rate(48000);
  const auto pulse = dsp::synthesize_pulse(tpl);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> x(9000);
  for (double& v : x) v = noise(rng);
  st::place(x, pulse.samples, 3333, 0.3);
  const auto a = dsp::detect_pulses(buffer_of(x, 48000), tpl);
  const auto b = dsp::detect_pulses(buffer_of(x, 48000), tpl);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sample_position, b[i].sample_position);
    EXPECT_EQ(a[i].peak_amplitude, b[i].peak_amplitude);
  }
}

TEST(Detect, StreamingMatchesBatchAcrossBlockEdges) {
  const auto tpl = at_rate(48000);
  const auto pulse = dsp::synthesize_pulse(tpl);
  std::vector<double> x(30000, 0.0);
  // Arrivals deliberately placed around multiples of the 2048-sample hop.
  for (std::size_t at : {2040u, 8190u, 16380u, 24570u}) st::place(x, pulse.samples, at, 0.7);
  const auto batch = dsp::detect_pulses(buffer_of(x, 48000), tpl);
  ASSERT_EQ(batch.size(), 4u);

  dsp::StreamDetector stream(dsp::MatchedFilter::shared(tpl, 2048), {}, 0.0);
  std::vector<dsp::DetectionEvent> streamed;
  for (std::size_t i = 0; i < x.size(); i += 777) {
    const auto n = std::min<std::size_t>(777, x.size() - i);
    auto ev = stream.push(std::span<const double>(x).subspan(i, n));
    streamed.insert(streamed.end(), ev.begin(), ev.end());
  }
  auto tail = stream.finish();
  streamed.insert(streamed.end(), tail.begin(), tail.end());
  ASSERT_EQ(streamed.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(streamed[i].sample_position, batch[i].sample_position, 1e-3);
}

TEST(Detect, RejectsRateMismatchAndShortBuffers) {
  const auto tpl = at_rate(48000);
  EXPECT_THROW(dsp::detect_pulses(buffer_of(std::vector<double>(5000), 44100), tpl), sonicdist::InvalidArgument);
  EXPECT_THROW(dsp::detect_pulses(buffer_of(std::vector<double>(100), 48000), tpl), sonicdist::InvalidArgument);
}

TEST(Detect, SilenceYieldsNothing) {
  const auto tpl = at_rate(44100);
  EXPECT_TRUE(dsp::detect_pulses(buffer_of(std::vector<double>(10000, 0.0), 44100), tpl).empty());
}

// Regression for the default threshold_k: 500 white-noise buffers of 0.1 s per
// rate (100 s of audio in all) must produce no events.
TEST(Detect, NoiseOnlyCalibrationHasNoFalsePositives) {
  constexpr std::uint64_t kSeed = 20240611;
  for (double rate : {44100.0, 48000.0}) {
    const auto tpl = at_rate(rate);
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> noise(0.0, 0.05);
    const auto n = static_cast<std::size_t>(rate / 10);
    std::size_t false_positives = 0;
    for (int b = 0; b < 500; ++b) {
      std::vector<double> x(n);
      for (auto& v : x) v = noise(rng);
      false_positives += dsp::detect_pulses(buffer_of(std::move(x), rate), tpl).size();
    }
    EXPECT_EQ(false_positives, 0u) << rate;
  }
}

TEST(Detect, PulseInNoiseIsFound) {
  const auto tpl = at_rate(48000);
  const auto pulse = dsp::synthesize_pulse(tpl).samples;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> x(9600);
  for (auto& v : x) v = noise(rng);
  st::place(x, pulse, 4000, 0.2);
  const auto ev = dsp::detect_pulses(buffer_of(std::move(x), 48000), tpl);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_NEAR(ev[0].sample_position, 4000.0, 0.5);
}
