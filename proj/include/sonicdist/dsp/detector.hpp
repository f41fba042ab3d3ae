// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "sonicdist/dsp/fft.hpp"
#include "sonicdist/dsp/interp.hpp"
#include "sonicdist/dsp/pulse.hpp"
#include "sonicdist/dsp/types.hpp"

namespace sonicdist::dsp {

struct DetectorConfig {
  /// Noise threshold on the matched-filter envelope: median + k * MAD.
  double threshold_k = 12.0;
  /// Arrivals weaker than this fraction of the strongest arrival within one
  /// template length are ignored. Must stay below 1/100 so that a direct path
  /// 40 dB under its echo is still reported.
  double relative_floor = 4e-3;
  /// Envelope values below this are treated as silence.
  double absolute_floor = 1e-9;
  /// Upper bound on arrivals modelled per analysis window.
  std::size_t max_components = 8;
  /// Analysis hop in samples; blocks pushed to a stream are split to this size.
  std::size_t block_samples = 2048;
};

struct SubsampleEstimate {
  double position = 0.0;
  bool at_boundary = false;
};

/// Three-point parabolic vertex around `coarse_index`. Boundary indices come
/// back unchanged with `at_boundary` set.
inline SubsampleEstimate refine_timestamp(std::span<const double> envelope, std::size_t coarse_index) {
  if (coarse_index == 0 || coarse_index + 1 >= envelope.size())
    return {static_cast<double>(coarse_index), true};
  const double ym = envelope[coarse_index - 1];
  const double y0 = envelope[coarse_index];
  const double yp = envelope[coarse_index + 1];
  const double denom = ym - 2.0 * y0 + yp;
  double delta = 0.0;
  if (denom < 0.0) delta = 0.5 * (ym - yp) / denom;
  delta = std::clamp(delta, -0.999999, 0.999999);
  return {static_cast<double>(coarse_index) + delta, false};
}

/// Immutable per-template state: unit-energy template, its spectrum at the
/// analysis FFT size, and an oversampled table of the analytic template
/// autocorrelation. Shareable across threads.
class MatchedFilter {
 public:
  using Complex = std::complex<double>;
  static constexpr int kTableOversample = 32;

  MatchedFilter(const PulseTemplate& tpl, std::size_t hop) : tpl_(tpl), hop_(hop) {
    tpl.validate();
    if (hop == 0) throw InvalidArgument("matched filter: hop must be positive");
    auto pulse = synthesize_pulse(tpl).samples;
    const double energy = std::inner_product(pulse.begin(), pulse.end(), pulse.begin(), 0.0);
    pulse_norm_ = std::sqrt(energy);
    len_ = pulse.size();
    unit_.resize(len_);
    for (std::size_t i = 0; i < len_; ++i) unit_[i] = pulse[i] / pulse_norm_;

    fft_ = &Fft::of_size(next_pow2(hop + 4 * len_));
    spectrum_ = spectrum_at(*fft_);
    build_autocorrelation_table();
    carrier_period_ = tpl.sample_rate_hz / (0.5 * (tpl.f1_hz + tpl.f2_hz));
    beat_period_ = tpl.sample_rate_hz / (tpl.f2_hz - tpl.f1_hz);
  }

  /// Shared instance per (template, hop); construction is not cheap.
  static std::shared_ptr<const MatchedFilter> shared(const PulseTemplate& tpl, std::size_t hop) {
    static std::mutex mutex;
    static std::map<std::tuple<double, double, double, double, double, double, std::size_t>,
                    std::shared_ptr<const MatchedFilter>>
        cache;
    const auto key = std::make_tuple(tpl.f1_hz, tpl.f2_hz, tpl.segment_duration_s, tpl.gap_duration_s,
                                     tpl.sample_rate_hz, tpl.window_shape_param, hop);
    std::lock_guard lock(mutex);
    auto& slot = cache[key];
    if (!slot) slot = std::make_shared<const MatchedFilter>(tpl, hop);
    return slot;
  }

  const PulseTemplate& pulse_template() const noexcept { return tpl_; }
  std::size_t length() const noexcept { return len_; }
  std::size_t hop() const noexcept { return hop_; }
  std::size_t max_analysis_length() const noexcept { return fft_->size(); }
  double carrier_period() const noexcept { return carrier_period_; }
  /// Period of the envelope beat between the two tones, in samples.
  double beat_period() const noexcept { return beat_period_; }
  /// L2 norm of the peak-normalized pulse; a unit-peak arrival of gain g
  /// produces a matched-filter peak of g * pulse_norm().
  double pulse_norm() const noexcept { return pulse_norm_; }
  std::span<const double> unit_template() const noexcept { return unit_; }

  /// Analytic correlation of `x` (length <= max_analysis_length()) with the unit template.
  std::vector<Complex> correlate(std::span<const double> x) const {
    return analytic_correlation(x, spectrum_, len_, *fft_);
  }

  /// Analytic template autocorrelation at a fractional lag; zero beyond one template length.
  Complex autocorrelation(double lag) const noexcept {
    const double u = (lag + table_origin_) * kTableOversample;
    if (u < 1.0 || u >= static_cast<double>(table_.size()) - 2.0) return {};
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    // Four-point Lagrange on (i-1, i, i+1, i+2).
    const double wm = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return wm * table_[i - 1] + w0 * table_[i] + w1 * table_[i + 1] + w2 * table_[i + 2];
  }

  /// out[k] += gain * autocorrelation(first_lag + k). Lags advance by whole
  /// samples, so the interpolation weights are shared.
  void add_response(std::span<Complex> out, double first_lag, Complex gain) const noexcept {
    const double u0 = (first_lag + table_origin_) * kTableOversample;
    const double base = std::floor(u0);
    const double f = u0 - base;
    const Complex wm = gain * (-f * (f - 1.0) * (f - 2.0) / 6.0);
    const Complex w0 = gain * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0);
    const Complex w1 = gain * (-(f + 1.0) * f * (f - 2.0) / 2.0);
    const Complex w2 = gain * ((f + 1.0) * f * (f - 1.0) / 6.0);
    const long last = static_cast<long>(table_.size()) - 3;
    long i = static_cast<long>(base);
    for (std::size_t k = 0; k < out.size(); ++k, i += kTableOversample) {
      if (i < 1 || i > last) continue;
      const Complex* t = table_.data() + i;
      out[k] += wm * t[-1] + w0 * t[0] + w1 * t[1] + w2 * t[2];
    }
  }

 private:
  std::vector<Complex> spectrum_at(const Fft& fft) const {
    std::vector<double> padded(fft.size(), 0.0);
    std::copy(unit_.begin(), unit_.end(), padded.begin());
    std::vector<Complex> spec(fft.size() / 2 + 1);
    fft.forward(padded, spec);
    return spec;
  }

  void build_autocorrelation_table() {
    // Integer-lag analytic autocorrelation via the same correlation path.
    const std::size_t m = len_;
    std::vector<double> padded(3 * m, 0.0);
    std::copy(unit_.begin(), unit_.end(), padded.begin() + static_cast<long>(m));
    const Fft& fft = Fft::of_size(next_pow2(4 * m));
    const auto spec = spectrum_at(fft);
    const auto lags = analytic_correlation(padded, spec, m, fft);  // lags[k] = R(k - m)

    // Oversample between integer lags with band-limited interpolation.
    table_origin_ = static_cast<double>(m) + 2.0;
    const std::size_t span_pts = static_cast<std::size_t>(2.0 * table_origin_ * kTableOversample) + 4;
    table_.resize(span_pts);
    std::vector<double> re(lags.size()), im(lags.size());
    for (std::size_t k = 0; k < lags.size(); ++k) {
      re[k] = lags[k].real();
      im[k] = lags[k].imag();
    }
    for (std::size_t j = 0; j < span_pts; ++j) {
      const double lag = static_cast<double>(j) / kTableOversample - table_origin_;
      const double u = lag + static_cast<double>(m);
      table_[j] = {interpolate_at<double>(re, u), interpolate_at<double>(im, u)};
    }
  }

  PulseTemplate tpl_;
  std::size_t hop_;
  std::vector<double> unit_;
  std::size_t len_ = 0;
  double pulse_norm_ = 1.0;
  const Fft* fft_ = nullptr;
  std::vector<Complex> spectrum_;
  std::vector<Complex> table_;
  double table_origin_ = 0.0;
  double carrier_period_ = 0.0;
  double beat_period_ = 0.0;
};

namespace detail {

struct Component {
  double lag = 0.0;        // fractional lag within the analysis window
  double amplitude = 0.0;  // real amplitude in unit-template units
};

inline double median_inplace(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline double golden_max(double a, double b, double tol, const auto& f) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

/// Multi-arrival least-squares fit for one analysis window.
///
/// Arrivals are added greedily at the peak of the residual envelope. The real
/// template model (one real amplitude per arrival) has local optima every
/// carrier cycle and every two-tone beat period, so overlapping arrivals are
/// located jointly first: pairs are searched exhaustively with a free complex
/// gain per arrival (smooth in lag), then locked to the real template and the
/// carrier cycle is chosen by comparing the exact cost of the neighbouring
/// cycles.
class WindowFit {
 public:
  using Complex = std::complex<double>;

  WindowFit(const MatchedFilter& mf, std::span<const double> x, const DetectorConfig& cfg)
      : mf_(mf), cfg_(cfg) {
    corr_ = mf.correlate(x);
    const std::size_t n = corr_.size();
    real_.resize(n);
    env_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      real_[k] = corr_[k].real();
      env_[k] = std::sqrt(std::norm(corr_[k]));
    }
    std::vector<double> scratch(env_);
    const double med = median_inplace(scratch);
    for (std::size_t k = 0; k < n; ++k) scratch[k] = std::abs(env_[k] - med);
    const double mad = median_inplace(scratch);
    noise_threshold_ = med + cfg.threshold_k * mad;
    reach_ = 6.0 * mf.beat_period();
  }

  double noise_threshold() const noexcept { return noise_threshold_; }
  const std::vector<Component>& components() const noexcept { return comps_; }

  /// Cheap pre-check: can any lag in [lo, hi) hold a significant arrival? The
  /// envelope there must reach the noise floor and the relative floor of the
  /// strongest envelope value within one template length.
  bool may_hold_arrival(std::size_t lo, std::size_t hi) const {
    hi = std::min(hi, env_.size());
    if (lo >= hi) return false;
    const std::size_t m = mf_.length();
    const std::size_t ctx_lo = lo > m ? lo - m : 0;
    const std::size_t ctx_hi = std::min(env_.size(), hi + m);
    double own = 0.0, ctx = 0.0;
    for (std::size_t k = ctx_lo; k < ctx_hi; ++k) {
      ctx = std::max(ctx, env_[k]);
      if (k >= lo && k < hi) own = std::max(own, env_[k]);
    }
    return own >= std::max({noise_threshold_, cfg_.absolute_floor, cfg_.relative_floor * ctx});
  }

  void run() {
    const std::size_t n = corr_.size();
    if (n < 3) return;
    double strongest = 0.0;
    std::vector<Complex> model(n);
    std::vector<double> residual(n);
    for (std::size_t iter = 0; iter < cfg_.max_components; ++iter) {
      std::fill(model.begin(), model.end(), Complex{});
      for (const auto& c : comps_) add_to(model, 0, c, 1.0);
      for (std::size_t k = 0; k < n; ++k) residual[k] = std::sqrt(std::norm(corr_[k] - model[k]));
      std::size_t best = 0;
      double best_val = -1.0;
      for (std::size_t k = 1; k + 1 < n; ++k) {
        const double v = residual[k];
        if (v > best_val && v >= residual[k - 1] && v >= residual[k + 1]) {
          best_val = v;
          best = k;
        }
      }
      if (best_val <= 0.0) break;
      const double floor = std::max({noise_threshold_, cfg_.absolute_floor,
                                     cfg_.relative_floor * std::max(strongest, best_val)});
      if (best_val < floor) break;

      comps_.push_back({refine_timestamp(residual, best).position, best_val});
      const std::size_t i = comps_.size() - 1;
      const std::size_t partner = strongest_neighbour(i);
      if (partner == kNone) {
        place_single(i);
      } else {
        solve_pair(i, partner);
      }
      settle();
      // Overlapping pairs other than the new one may have been disturbed.
      for (std::size_t a = 0; a < comps_.size(); ++a) {
        const std::size_t b = strongest_neighbour(a);
        if (b != kNone && a != i && b != i) solve_pair(a, b);
      }
      std::erase_if(comps_, [](const Component& c) { return !(c.amplitude > 0.0); });
      strongest = 0.0;
      for (const auto& c : comps_) strongest = std::max(strongest, c.amplitude);
    }
  }

  /// Effective per-arrival threshold on amplitude.
  double threshold_for(std::size_t i) const {
    double local = 0.0;
    const double window = static_cast<double>(mf_.length());
    for (const auto& c : comps_)
      if (std::abs(c.lag - comps_[i].lag) < window) local = std::max(local, c.amplitude);
    return std::max({noise_threshold_, cfg_.absolute_floor, cfg_.relative_floor * local});
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // out[k - first] += sign * response of c at integer lag k, for the overlap
  // of c's support with [first, first + out.size()).
  void add_to(std::vector<Complex>& out, long first, const Component& c, double sign) const {
    const long m = static_cast<long>(mf_.length());
    const long lo = std::max(first, static_cast<long>(std::floor(c.lag)) - m - 1);
    const long hi = std::min(first + static_cast<long>(out.size()) - 1, static_cast<long>(std::ceil(c.lag)) + m + 1);
    if (hi < lo) return;
    mf_.add_response(std::span<Complex>(out).subspan(static_cast<std::size_t>(lo - first),
                                                     static_cast<std::size_t>(hi - lo + 1)),
                     static_cast<double>(lo) - c.lag, Complex(sign * c.amplitude, 0.0));
  }

  std::size_t strongest_neighbour(std::size_t i) const {
    std::size_t best = kNone;
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      if (k == i || std::abs(comps_[k].lag - comps_[i].lag) >= reach_) continue;
      if (best == kNone || comps_[k].amplitude > comps_[best].amplitude) best = k;
    }
    return best;
  }

  // Correlation at a fractional lag minus every arrival except i and j.
  Complex partial(double lag, std::size_t i, std::size_t j = kNone) const {
    Complex r = interpolate_at<Complex>(corr_, lag);
    for (std::size_t k = 0; k < comps_.size(); ++k)
      if (k != i && k != j) r -= comps_[k].amplitude * mf_.autocorrelation(lag - comps_[k].lag);
    return r;
  }

  // Exact least-squares cost of the current model, up to a constant.
  double objective() const {
    double j = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      j -= 2.0 * comps_[i].amplitude * interpolate_at<double>(real_, comps_[i].lag);
      for (std::size_t k = 0; k < comps_.size(); ++k)
        j += comps_[i].amplitude * comps_[k].amplitude * mf_.autocorrelation(comps_[i].lag - comps_[k].lag).real();
    }
    return j;
  }

  // Maximize the real partial residual of arrival i within half a carrier
  // period of `centre`.
  void refine_coherent(std::size_t i, double centre) {
    const double half = 0.5 * mf_.carrier_period();
    const double lo_lim = 0.0;
    const double hi_lim = static_cast<double>(real_.size() - 1);
    auto value = [&](double lag) { return partial(lag, i).real(); };
    constexpr int kGrid = 8;
    double best_lag = centre;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int g = 0; g <= kGrid; ++g) {
      const double lag = std::clamp(centre - half + 2.0 * half * g / kGrid, lo_lim, hi_lim);
      const double v = value(lag);
      if (v > best_val) {
        best_val = v;
        best_lag = lag;
      }
    }
    const double step = 2.0 * half / kGrid;
    const double lag = golden_max(std::max(lo_lim, best_lag - step), std::min(hi_lim, best_lag + step), 1e-5, value);
    comps_[i].lag = lag;
    comps_[i].amplitude = std::max(0.0, value(lag));
  }

  // Lone arrival: envelope peak, then the carrier cycle under it.
  void place_single(std::size_t i) {
    const double hi_lim = static_cast<double>(corr_.size() - 1);
    const double c = comps_[i].lag;
    const double lag = golden_max(std::max(0.0, c - 1.0), std::min(hi_lim, c + 1.0), 1e-4,
                                  [&](double t) { return std::norm(partial(t, i)); });
    refine_coherent(i, lag);
  }

  // Local joint refinement of every arrival on the real model.
  void settle() {
    constexpr int kMaxSweeps = 40;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double moved = 0.0;
      for (std::size_t i = 0; i < comps_.size(); ++i) {
        const double before = comps_[i].lag;
        refine_coherent(i, before);
        moved = std::max(moved, std::abs(comps_[i].lag - before));
      }
      if (moved < 1e-5) break;
    }
  }

  // Joint placement of two overlapping arrivals with everything else fixed.
  void solve_pair(std::size_t i, std::size_t j) {
    const long n = static_cast<long>(corr_.size());
    const double margin = 3.0 * mf_.beat_period();
    const long lo = std::max(0L, static_cast<long>(std::floor(std::min(comps_[i].lag, comps_[j].lag) - margin)));
    const long hi = std::min(n - 1, static_cast<long>(std::ceil(std::max(comps_[i].lag, comps_[j].lag) + margin)));
    const long span = hi - lo + 1;

    // Partial residual on the integer grid, and the autocorrelation at every
    // integer separation.
    std::vector<Complex> p(static_cast<std::size_t>(span));
    for (long k = lo; k <= hi; ++k) p[static_cast<std::size_t>(k - lo)] = corr_[static_cast<std::size_t>(k)];
    for (std::size_t k = 0; k < comps_.size(); ++k)
      if (k != i && k != j) add_to(p, lo, comps_[k], -1.0);
    std::vector<Complex> rho(static_cast<std::size_t>(span));
    for (long d = 0; d < span; ++d) rho[static_cast<std::size_t>(d)] = mf_.autocorrelation(static_cast<double>(d));

    // Energy explained by two free complex gains at (t1 < t2):
    // p^H G^-1 p with G = [[1, R(t1 - t2)], [R(t2 - t1), 1]].
    auto explained = [](Complex p1, Complex p2, Complex r12) {
      const double det = 1.0 - std::norm(r12);
      if (det < 1e-3) return -1.0;
      return (std::norm(p1) + std::norm(p2) - 2.0 * (std::conj(p1) * r12 * p2).real()) / det;
    };
    constexpr double kMinSeparation = 4.0;
    double best = -1.0;
    double t1 = 0.0, t2 = 0.0;
    auto consider = [&](double a, Complex pa, double b, Complex pb, Complex r_ab) {
      if (b - a < kMinSeparation) return;
      const double q = explained(pa, pb, r_ab);
      if (q > best) {
        best = q;
        t1 = a;
        t2 = b;
      }
    };
    for (long k1 = 0; k1 < span; ++k1) {
      const Complex p1 = p[static_cast<std::size_t>(k1)];
      for (long k2 = k1 + static_cast<long>(kMinSeparation); k2 < span; ++k2)
        // R(t1 - t2) = conj(R(t2 - t1))
        consider(static_cast<double>(lo + k1), p1, static_cast<double>(lo + k2), p[static_cast<std::size_t>(k2)],
                 std::conj(rho[static_cast<std::size_t>(k2 - k1)]));
    }
    // A strong arrival off the integer grid leaves residual energy that a
    // spurious close pair can explain better than a weak true arrival, so the
    // current lags are also tried on a fine grid.
    constexpr int kFine = 30;
    constexpr double kFineStep = 0.05;
    std::array<std::vector<std::pair<double, Complex>>, 2> fine;
    for (int a = 0; a < 2; ++a) {
      const double centre = comps_[a == 0 ? i : j].lag;
      for (int s = -kFine; s <= kFine; ++s) {
        const double lag = centre + s * kFineStep;
        if (lag >= 0.0 && lag <= static_cast<double>(n - 1)) fine[a].emplace_back(lag, partial(lag, i, j));
      }
    }
    for (const auto& set : fine) {
      for (const auto& [f, pf] : set) {
        for (long k = 0; k < span; ++k) {
          const double g = static_cast<double>(lo + k);
          const Complex pg = p[static_cast<std::size_t>(k)];
          if (g < f) consider(g, pg, f, pf, mf_.autocorrelation(g - f));
          else consider(f, pf, g, pg, mf_.autocorrelation(f - g));
        }
      }
    }
    for (const auto& [fa, pa] : fine[0]) {
      for (const auto& [fb, pb] : fine[1]) {
        if (fa < fb) consider(fa, pa, fb, pb, mf_.autocorrelation(fa - fb));
        else consider(fb, pb, fa, pa, mf_.autocorrelation(fb - fa));
      }
    }
    if (best < 0.0) return;

    // Continuous refinement of both lags on the free-gain cost.
    auto cost = [&](double a, double b) {
      return explained(partial(a, i, j), partial(b, i, j), mf_.autocorrelation(a - b));
    };
    for (int round = 0; round < 8; ++round) {
      const double o1 = t1, o2 = t2;
      t1 = golden_max(t1 - 1.0, t1 + 1.0, 1e-4, [&](double a) { return cost(a, t2); });
      t2 = golden_max(t2 - 1.0, t2 + 1.0, 1e-4, [&](double b) { return cost(t1, b); });
      if (std::abs(t1 - o1) + std::abs(t2 - o2) < 1e-3) break;
    }

    // Lock to the real template; choose the carrier cycle of each arrival by
    // the exact cost. Each lag stays within half a cycle of its candidate.
    const Complex q1 = partial(t1, i, j), q2 = partial(t2, i, j);
    const Complex r12 = mf_.autocorrelation(t1 - t2);
    const double det = 1.0 - std::norm(r12);
    const double a1 = std::abs((q1 - r12 * q2) / det);
    const double a2 = std::abs((q2 - std::conj(r12) * q1) / det);
    const auto saved = comps_;
    const double cycle = mf_.carrier_period();
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<Component> best_comps;
    for (int s1 = -1; s1 <= 1; ++s1) {
      for (int s2 = -1; s2 <= 1; ++s2) {
        comps_ = saved;
        const double c1 = t1 + s1 * cycle, c2 = t2 + s2 * cycle;
        comps_[i] = {c1, a1};
        comps_[j] = {c2, a2};
        for (int sweep = 0; sweep < 4; ++sweep) {
          refine_coherent(i, c1);
          refine_coherent(j, c2);
        }
        const double c = objective();
        if (c < best_cost) {
          best_cost = c;
          best_comps = comps_;
        }
      }
    }
    comps_ = std::move(best_comps);
  }

  const MatchedFilter& mf_;
  const DetectorConfig& cfg_;
  std::vector<Complex> corr_;
  std::vector<double> real_;
  std::vector<double> env_;
  double noise_threshold_ = 0.0;
  double reach_ = 0.0;
  std::vector<Component> comps_;
};

}  // namespace detail

/// Streaming pulse detector for one microphone stream.
///
/// Each lag is owned by exactly one analysis window; windows carry two
/// template lengths of context on each side so arrivals that straddle block
/// edges are modelled in full. An arrival is reported only if no significant
/// arrival lies less than one template length before it (earliest-arrival
/// rule), which is what rejects echoes.
class StreamDetector {
 public:
  StreamDetector(std::shared_ptr<const MatchedFilter> mf, DetectorConfig cfg, double origin_time_s)
      : mf_(std::move(mf)), cfg_(cfg), origin_time_s_(origin_time_s) {
    m_ = static_cast<long>(mf_->length());
    buffer_.assign(static_cast<std::size_t>(2 * m_), 0.0);
    buffer_start_ = -2 * m_;
  }

  double sample_rate_hz() const noexcept { return mf_->pulse_template().sample_rate_hz; }
  long samples_received() const noexcept { return received_; }

  std::vector<DetectionEvent> push(std::span<const double> samples) {
    std::vector<DetectionEvent> events;
    const std::size_t hop = mf_->hop();
    while (!samples.empty()) {
      const std::size_t take = std::min(hop, samples.size());
      buffer_.insert(buffer_.end(), samples.begin(), samples.begin() + static_cast<long>(take));
      received_ += static_cast<long>(take);
      samples = samples.subspan(take);
      const long own_end = received_ - 2 * m_ + 1;
      if (own_end > owned_until_) analyse(own_end, events);
    }
    return events;
  }

  /// Flushes every remaining lag that has a full template's worth of samples.
  std::vector<DetectionEvent> finish() {
    std::vector<DetectionEvent> events;
    const long own_end = received_ - m_ + 1;
    while (owned_until_ < own_end) {
      const long step_end = std::min(own_end, owned_until_ + static_cast<long>(mf_->hop()));
      analyse(step_end, events);
    }
    return events;
  }

 private:
  void analyse(long own_end, std::vector<DetectionEvent>& events) {
    const long start = owned_until_ - 2 * m_;
    const long end = std::min(received_, own_end + 2 * m_ - 1);
    const auto first = static_cast<std::size_t>(start - buffer_start_);
    const auto last = static_cast<std::size_t>(end - buffer_start_);
    std::span<const double> window(buffer_.data() + first, last - first);

    // Only samples that an arrival at an owned lag would overlap can matter.
    const auto own_first = static_cast<std::size_t>(owned_until_ - buffer_start_);
    const auto own_last = static_cast<std::size_t>(std::min(received_, own_end + m_ - 1) - buffer_start_);
    const bool silent = std::all_of(buffer_.begin() + static_cast<long>(own_first),
                                    buffer_.begin() + static_cast<long>(own_last),
                                    [](double v) { return v == 0.0; });
    if (!silent && window.size() >= static_cast<std::size_t>(m_)) {
      detail::WindowFit fit(*mf_, window, cfg_);
      if (!fit.may_hold_arrival(static_cast<std::size_t>(owned_until_ - start),
                               static_cast<std::size_t>(own_end - start))) {
        owned_until_ = own_end;
        trim();
        return;
      }
      fit.run();
      const auto& comps = fit.components();
      std::vector<std::size_t> order(comps.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return comps[a].lag < comps[b].lag; });

      std::vector<bool> significant(comps.size());
      for (std::size_t i = 0; i < comps.size(); ++i)
        significant[i] = comps[i].amplitude >= fit.threshold_for(i);

      const double window_len = static_cast<double>(m_);
      for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (!significant[i]) continue;
        const double pos = static_cast<double>(start) + comps[i].lag;
        if (pos < static_cast<double>(owned_until_) || pos >= static_cast<double>(own_end)) continue;
        bool masked = pos - last_reported_ < window_len;
        for (std::size_t oj = 0; oj < oi && !masked; ++oj) {
          const std::size_t j = order[oj];
          masked = significant[j] && comps[i].lag - comps[j].lag < window_len;
        }
        if (masked) continue;
        const double thr = fit.threshold_for(i);
        DetectionEvent ev;
        ev.sample_position = pos;
        ev.arrival_time_s = origin_time_s_ + pos / sample_rate_hz();
        ev.peak_amplitude = comps[i].amplitude / mf_->pulse_norm();
        ev.score = cfg_.threshold_k * comps[i].amplitude / thr;
        events.push_back(ev);
        last_reported_ = pos;
      }
    }
    owned_until_ = own_end;
    trim();
  }

  void trim() {
    const long keep_from = owned_until_ - 2 * m_;
    if (keep_from - buffer_start_ > 8 * m_) {
      const auto drop = static_cast<std::size_t>(keep_from - buffer_start_);
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(drop));
      buffer_start_ = keep_from;
    }
  }

  std::shared_ptr<const MatchedFilter> mf_;
  DetectorConfig cfg_;
  double origin_time_s_;
  long m_ = 0;
  std::vector<double> buffer_;
  long buffer_start_ = 0;
  long received_ = 0;
  long owned_until_ = 0;
  double last_reported_ = -std::numeric_limits<double>::infinity();
};

/// Batch detection over a whole buffer. Events come back in arrival order.
inline std::vector<DetectionEvent> detect_pulses(const SampleBuffer& buffer, const PulseTemplate& tpl,
                                                 const DetectorConfig& cfg = {}) {
  tpl.validate();
  if (buffer.sample_rate_hz != tpl.sample_rate_hz)
    throw InvalidArgument("detect_pulses: buffer and template sample rates differ");
  if (buffer.size() < tpl.total_samples())
    throw InvalidArgument("detect_pulses: buffer shorter than the template");
  StreamDetector stream(MatchedFilter::shared(tpl, cfg.block_samples), cfg, buffer.origin_time_s);
  auto events = stream.push(buffer.samples);
  auto tail = stream.finish();
  events.insert(events.end(), tail.begin(), tail.end());
  return events;
}

}  // namespace sonicdist::dsp
