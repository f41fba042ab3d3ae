// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "sonicdist/dsp/interp.hpp"
#include "sonicdist/dsp/types.hpp"
#include "sonicdist/error.hpp"
#include "sonicdist/ranging/clock.hpp"

namespace sonicdist::sim {

/// One device's microphone, sampled on its own clock from true time 0.
/// Sample n is taken at local time offset + n/fs, so a sound reaching the
/// device at true time T lands at fractional sample T * rate * fs.
class MicStream {
 public:
  MicStream(double sample_rate_hz, ranging::DeviceClock clock, double noise_rms, std::uint64_t seed,
            std::size_t block_samples)
      : fs_(sample_rate_hz), clock_(clock), noise_rms_(noise_rms), rng_(seed), block_(block_samples) {
    if (!(fs_ > 0.0)) throw InvalidArgument("mic: sample rate must be positive");
    if (block_ == 0) throw InvalidArgument("mic: block size must be positive");
    if (!(noise_rms_ >= 0.0)) throw InvalidArgument("mic: noise rms must be non-negative");
  }

  double sample_rate_hz() const noexcept { return fs_; }
  std::size_t block_samples() const noexcept { return block_; }
  /// Local clock reading at sample 0.
  double origin_local_s() const noexcept { return clock_.offset_s; }
  long rendered() const noexcept { return cursor_; }

  double sample_position(double true_time_s) const noexcept { return true_time_s * clock_.rate() * fs_; }
  double true_time_of_sample(double n) const noexcept { return n / fs_ / clock_.rate(); }
  /// True time at which the block now pending has been fully captured.
  double next_block_ready_true_s() const noexcept {
    return true_time_of_sample(static_cast<double>(cursor_ + static_cast<long>(block_)));
  }

  /// Schedules `waveform` (sampled at `source_rate_hz`) to start arriving at
  /// `true_time_s` with the given gain. Parts that fall before the render
  /// cursor are lost.
  void add_arrival(const dsp::OversampledSignal& waveform, double source_rate_hz, double true_time_s, double gain) {
    if (gain == 0.0 || waveform.source_length() == 0) return;
    const double u = sample_position(true_time_s);
    const double r = source_rate_hz / fs_;
    const double span = static_cast<double>(waveform.source_length()) / r;
    const long hw = dsp::SincKernel::kHalfWidth;
    const long first = static_cast<long>(std::floor(u)) - hw;
    const long last = static_cast<long>(std::ceil(u + span)) + hw;
    Pending p;
    p.start = first;
    p.samples.resize(static_cast<std::size_t>(last - first));
    for (long n = first; n < last; ++n)
      p.samples[static_cast<std::size_t>(n - first)] = gain * waveform((static_cast<double>(n) - u) * r);
    pending_.push_back(std::move(p));
  }

  /// Renders the next block: noise plus every scheduled arrival overlapping it.
  dsp::SampleBuffer render_block() {
    dsp::SampleBuffer out;
    out.sample_rate_hz = fs_;
    out.origin_time_s = clock_.offset_s + static_cast<double>(cursor_) / fs_;
    out.samples.assign(block_, 0.0);
    if (noise_rms_ > 0.0) {
      std::normal_distribution<double> noise(0.0, noise_rms_);
      for (double& v : out.samples) v = noise(rng_);
    }
    const long end = cursor_ + static_cast<long>(block_);
    for (const auto& p : pending_) {
      const long lo = std::max(p.start, cursor_);
      const long hi = std::min(p.start + static_cast<long>(p.samples.size()), end);
      for (long n = lo; n < hi; ++n)
        out.samples[static_cast<std::size_t>(n - cursor_)] += p.samples[static_cast<std::size_t>(n - p.start)];
    }
    cursor_ = end;
    std::erase_if(pending_, [&](const Pending& p) { return p.start + static_cast<long>(p.samples.size()) <= cursor_; });
    return out;
  }

  /// True when the next block would hold nothing but noise.
  bool next_block_silent() const {
    const long end = cursor_ + static_cast<long>(block_);
    return std::none_of(pending_.begin(), pending_.end(), [&](const Pending& p) {
      return p.start < end && p.start + static_cast<long>(p.samples.size()) > cursor_;
    });
  }

 private:
  struct Pending {
    long start = 0;
    std::vector<double> samples;
  };

  double fs_;
  ranging::DeviceClock clock_;
  double noise_rms_;
  std::mt19937_64 rng_;
  std::size_t block_;
  long cursor_ = 0;
  std::deque<Pending> pending_;
};

}  // namespace sonicdist::sim
