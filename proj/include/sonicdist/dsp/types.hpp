// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sonicdist/error.hpp"

namespace sonicdist::dsp {

/// Dual-tone pulse description. Defaults are the 18.5 / 19.25 kHz pair of
/// 10 ms segments separated by a 10 ms gap.
struct PulseTemplate {
  double f1_hz = 18500.0;
  double f2_hz = 19250.0;
  double segment_duration_s = 0.010;
  double gap_duration_s = 0.010;
  double sample_rate_hz = 48000.0;
  /// Temporal standard deviation of the confined-Gaussian window, as a fraction
  /// of the segment length.
  double window_shape_param = 0.1;

  std::size_t segment_samples() const {
    return static_cast<std::size_t>(std::lround(segment_duration_s * sample_rate_hz));
  }
  std::size_t gap_samples() const {
    return static_cast<std::size_t>(std::lround(gap_duration_s * sample_rate_hz));
  }
  std::size_t total_samples() const {
    return static_cast<std::size_t>(
        std::lround((2.0 * segment_duration_s + gap_duration_s) * sample_rate_hz));
  }

  void validate() const {
    if (!(sample_rate_hz > 0.0)) throw InvalidArgument("pulse template: sample rate must be positive");
    if (!(f1_hz > 0.0 && f1_hz < f2_hz && f2_hz < sample_rate_hz / 2.0))
      throw InvalidArgument("pulse template: need 0 < f1 < f2 < Nyquist");
    if (!(segment_duration_s > 0.0)) throw InvalidArgument("pulse template: segment duration must be positive");
    if (!(gap_duration_s >= 0.0)) throw InvalidArgument("pulse template: gap duration must be non-negative");
    if (!(window_shape_param > 0.0)) throw InvalidArgument("pulse template: window shape must be positive");
    if (segment_samples() < 4) throw InvalidArgument("pulse template: segment shorter than 4 samples");
  }

  friend bool operator==(const PulseTemplate&, const PulseTemplate&) = default;
};

/// A run of real audio samples. `origin_time_s` is the owning device's local
/// clock reading at sample 0.
struct SampleBuffer {
  std::vector<double> samples;
  double sample_rate_hz = 48000.0;
  double origin_time_s = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }
  double time_of(double sample_position) const noexcept {
    return origin_time_s + sample_position / sample_rate_hz;
  }

  void validate() const {
    if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample buffer: sample rate must be positive");
    for (double v : samples)
      if (!std::isfinite(v)) throw InvalidArgument("sample buffer: non-finite sample");
  }
};

/// One detected pulse arrival.
struct DetectionEvent {
  double arrival_time_s = 0.0;  ///< local clock, sub-sample resolution
  double sample_position = 0.0; ///< same instant as a fractional sample index of the stream
  double peak_amplitude = 0.0;  ///< fitted amplitude of the arrival, in buffer units
  double score = 0.0;           ///< k * amplitude / effective threshold; always >= k
};

}  // namespace sonicdist::dsp
