// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sonicdist/dsp/types.hpp"

namespace sonicdist::dsp {

/// Approximate confined Gaussian window of `length_samples` points.
///
/// `shape_param` is the temporal standard deviation as a fraction of the
/// window length. The window is normalized to a peak of exactly 1; the
/// continuous form reaches zero half a sample outside either end, so the
/// sampled endpoints are small but strictly positive.
inline std::vector<double> make_window(std::size_t length_samples, double shape_param) {
  if (length_samples < 4) throw InvalidArgument("make_window: length must be at least 4");
  if (!(shape_param > 0.0)) throw InvalidArgument("make_window: shape parameter must be positive");

  const double n_last = static_cast<double>(length_samples - 1);
  const double len = static_cast<double>(length_samples);
  const double width = 2.0 * len * shape_param;
  auto gauss = [&](double x) {
    const double z = (x - n_last / 2.0) / width;
    return std::exp(-z * z);
  };
  const double edge = gauss(-0.5) / (gauss(-0.5 + len) + gauss(-0.5 - len));

  std::vector<double> w(length_samples);
  for (std::size_t i = 0; i < length_samples; ++i) {
    const double x = static_cast<double>(i);
    w[i] = gauss(x) - edge * (gauss(x + len) + gauss(x - len));
  }
  // Evaluate symmetric pairs from one side so the result is exactly symmetric.
  for (std::size_t i = 0; i < length_samples / 2; ++i) w[length_samples - 1 - i] = w[i];

  const double peak = *std::max_element(w.begin(), w.end());
  for (double& v : w) v /= peak;
  return w;
}

/// Renders the dual-tone pulse: windowed tone at f1, silence, windowed tone at f2.
///
/// Each tone's carrier phase is referenced to its segment centre, which makes
/// the continuous-time waveform the same at every sample rate up to a shift of
/// half a sample period.
inline SampleBuffer synthesize_pulse(const PulseTemplate& tpl) {
  tpl.validate();
  const std::size_t seg = tpl.segment_samples();
  const std::size_t gap = tpl.gap_samples();
  const std::size_t total = tpl.total_samples();

  SampleBuffer out;
  out.sample_rate_hz = tpl.sample_rate_hz;
  out.samples.assign(total, 0.0);

  const auto window = make_window(seg, tpl.window_shape_param);
  const double centre = static_cast<double>(seg - 1) / 2.0;
  auto render = [&](std::size_t start, double freq) {
    for (std::size_t i = 0; i < seg && start + i < total; ++i) {
      const double t = (static_cast<double>(i) - centre) / tpl.sample_rate_hz;
      out.samples[start + i] = window[i] * std::cos(2.0 * std::numbers::pi * freq * t);
    }
  };
  render(0, tpl.f1_hz);
  render(seg + gap, tpl.f2_hz);

  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  for (double& v : out.samples) v /= peak;
  return out;
}

}  // namespace sonicdist::dsp
