// SPDX-License-Identifier: MIT
// Test-only reference routines. Nothing here calls into the library's FFT,
// interpolation or detection code, so these can serve as oracles for it.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace sonicdist::testing {

/// Adds gain * pulse into buf starting at integer offset.
inline void place(std::vector<double>& buf, std::span<const double> pulse, std::size_t offset, double gain) {
  for (std::size_t i = 0; i < pulse.size() && offset + i < buf.size(); ++i) buf[offset + i] += gain * pulse[i];
}

inline std::vector<std::complex<double>> twiddles(std::size_t n, double sign) {
  std::vector<std::complex<double>> w(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    w[m] = {std::cos(ang), std::sin(ang)};
  }
  return w;
}

/// Naive O(N^2) DFT.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  const auto w = twiddles(n, -1.0);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{};
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i, idx = (idx + k >= n) ? idx + k - n : idx + k) acc += x[i] * w[idx];
    out[k] = acc;
  }
  return out;
}

/// Band-limited fractional delays via exact phase ramps on the naive DFT of
/// the zero-padded signal (circular). `len` must leave enough zero padding
/// that nothing wraps around.
class DftDelayLine {
 public:
  DftDelayLine(std::span<const double> x, std::size_t len) : n_(len), w_(twiddles(len, 1.0)) {
    std::vector<double> padded(len, 0.0);
    for (std::size_t i = 0; i < x.size() && i < len; ++i) padded[i] = x[i];
    spec_ = naive_dft(padded);
  }

  /// Sum of gain * x(t - delay) over the given paths, sampled at 0..len-1.
  std::vector<double> render(std::span<const std::pair<double, double>> delay_gain) const {
    const std::size_t half = n_ / 2;
    std::vector<std::complex<double>> spec(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
      const bool nyquist = n_ % 2 == 0 && k == half;
      for (const auto& [delay, gain] : delay_gain) {
        const double ang = nyquist ? 0.0
                                   : -2.0 * std::numbers::pi * static_cast<double>(k) * delay / static_cast<double>(n_);
        spec[k] += gain * spec_[k] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
    }
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = spec[0].real();
      std::size_t idx = 0;
      for (std::size_t k = 1; k <= half; ++k) {
        idx = (idx + i >= n_) ? idx + i - n_ : idx + i;
        const double term = spec[k].real() * w_[idx].real() - spec[k].imag() * w_[idx].imag();
        acc += (n_ % 2 == 0 && k == half) ? term : 2.0 * term;
      }
      out[i] = acc / static_cast<double>(n_);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> w_;
  std::vector<std::complex<double>> spec_;
};

inline std::vector<double> dft_fractional_delay(std::span<const double> x, double delay, std::size_t len) {
  const std::pair<double, double> path{delay, 1.0};
  return DftDelayLine(x, len).render(std::span(&path, 1));
}

/// Time-domain correlation of x with t at every full-overlap integer lag.
inline std::vector<double> brute_correlation(std::span<const double> x, std::span<const double> t) {
  std::vector<double> c(x.size() - t.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += x[k + i] * t[i];
    c[k] = acc;
  }
  return c;
}

/// Brute-force earliest-arrival oracle for integer-offset arrivals: repeatedly
/// take the strongest normalized correlation peak, subtract the matching
/// template copy, and finally return the earliest arrival whose strength is at
/// least `rel` of the strongest one.
inline std::size_t earliest_arrival_oracle(std::vector<double> x, std::span<const double> t, int max_paths,
                                           double rel) {
  double energy = 0.0;
  for (double v : t) energy += v * v;
  std::vector<std::pair<std::size_t, double>> found;
  for (int p = 0; p < max_paths; ++p) {
    const auto c = brute_correlation(x, t);
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.size(); ++k)
      if (std::abs(c[k]) > std::abs(c[best])) best = k;
    const double gain = c[best] / energy;
    if (!found.empty() && std::abs(gain) < rel * std::abs(found.front().second)) break;
    found.emplace_back(best, gain);
    for (std::size_t i = 0; i < t.size(); ++i) x[best + i] -= gain * t[i];
  }
  std::size_t earliest = found.front().first;
  for (const auto& [k, g] : found) earliest = std::min(earliest, k);
  return earliest;
}

}  // namespace sonicdist::testing
