// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace sonicdist::dsp {

/// Kaiser-windowed sinc interpolation used for fractional delays: rendering
/// pulses at non-integer arrival times and evaluating correlation sequences
/// between integer lags. Passband is flat to about 0.47 fs.
class SincKernel {
 public:
  static constexpr int kHalfWidth = 64;
  static constexpr int kTableDensity = 2048;
  static constexpr double kBeta = 10.0;

  static const SincKernel& instance() {
    static const SincKernel k;
    return k;
  }

  double operator()(double x) const noexcept {
    const double ax = std::abs(x) * kTableDensity;
    const auto i = static_cast<std::size_t>(ax);
    if (i + 1 >= table_.size()) return 0.0;
    const double frac = ax - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  SincKernel() {
    const std::size_t n = static_cast<std::size_t>(kHalfWidth) * kTableDensity + 2;
    table_.resize(n);
    const double norm = std::cyl_bessel_i(0.0, kBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / kTableDensity;
      if (x >= kHalfWidth) {
        table_[i] = 0.0;
        continue;
      }
      const double r = x / kHalfWidth;
      const double win = std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - r * r)) / norm;
      const double px = std::numbers::pi * x;
      table_[i] = (x == 0.0 ? 1.0 : std::sin(px) / px) * win;
    }
  }

  std::vector<double> table_;
};

/// Band-limited value of `seq` at fractional index `u`; samples outside the
/// sequence are treated as zero.
template <typename T>
T interpolate_at(std::span<const T> seq, double u) {
  const auto& kernel = SincKernel::instance();
  const long base = static_cast<long>(std::floor(u));
  const long lo = std::max<long>(0, base - SincKernel::kHalfWidth + 1);
  const long hi = std::min<long>(static_cast<long>(seq.size()) - 1, base + SincKernel::kHalfWidth);
  T acc{};
  for (long m = lo; m <= hi; ++m) acc += seq[static_cast<std::size_t>(m)] * kernel(u - static_cast<double>(m));
  return acc;
}

/// dst[n] += gain * src(rate * n + offset) for n in [first, last), where
/// src(.) is the band-limited reconstruction of `src`.
inline void add_resampled(std::span<double> dst, std::span<const double> src, double rate,
                          double offset, double gain, std::size_t first, std::size_t last) {
  last = std::min(last, dst.size());
  for (std::size_t n = first; n < last; ++n) {
    const double u = rate * static_cast<double>(n) + offset;
    if (u <= -SincKernel::kHalfWidth || u >= static_cast<double>(src.size()) + SincKernel::kHalfWidth) continue;
    dst[n] += gain * interpolate_at<double>(src, u);
  }
}

/// Band-limited reconstruction of a finite signal, tabulated at `density`
/// points per sample and read back with 4-point Lagrange interpolation. Much
/// cheaper per evaluation than `interpolate_at` once built.
class OversampledSignal {
 public:
  explicit OversampledSignal(std::span<const double> src, int density = 32)
      : density_(density), length_(src.size()) {
    const long hw = SincKernel::kHalfWidth;
    origin_ = (hw + 2) * density;
    const long points = (static_cast<long>(src.size()) + 2 * hw + 4) * density;
    table_.resize(static_cast<std::size_t>(points));
    for (long m = 0; m < points; ++m)
      table_[static_cast<std::size_t>(m)] =
          interpolate_at<double>(src, static_cast<double>(m - origin_) / density);
  }

  std::size_t source_length() const noexcept { return length_; }

  /// Value at fractional source index `u`; zero well outside the support.
  double operator()(double u) const noexcept {
    const double x = u * density_ + static_cast<double>(origin_);
    const long i = static_cast<long>(std::floor(x));
    if (i < 1 || i + 2 >= static_cast<long>(table_.size())) return 0.0;
    const double t = x - static_cast<double>(i);
    const double* y = table_.data() + i - 1;
    const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return c0 * y[0] + c1 * y[1] + c2 * y[2] + c3 * y[3];
  }

 private:
  int density_;
  std::size_t length_;
  long origin_ = 0;
  std::vector<double> table_;
};

}  // namespace sonicdist::dsp
