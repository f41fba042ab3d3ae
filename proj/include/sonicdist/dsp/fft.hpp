// SPDX-License-Identifier: MIT
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace sonicdist::dsp {

/// Thin FFTW wrapper. Plans are created once per size under a global lock
/// (FFTW's planner is not re-entrant) and executed with the new-array API,
/// which is safe from any thread.
class Fft {
 public:
  using Complex = std::complex<double>;

  static const Fft& of_size(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<Fft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new Fft(n));
    return *slot;
  }

  std::size_t size() const noexcept { return n_; }

  /// Real input of length n -> n/2+1 spectrum bins.
  void forward(std::span<double> in, std::span<Complex> out) const {
    auto* o = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft_r2c(aligned(in.data(), o) ? r2c_ : r2c_u_, in.data(), o);
  }

  /// Full complex inverse of length n, unnormalized.
  void inverse(std::span<Complex> in, std::span<Complex> out) const {
    auto* i = reinterpret_cast<fftw_complex*>(in.data());
    auto* o = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(aligned(i, o) ? c2c_inv_ : c2c_inv_u_, i, o);
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft() {
    for (auto* p : {r2c_, r2c_u_, c2c_inv_, c2c_inv_u_}) fftw_destroy_plan(p);
  }

 private:
  // Two plan sets: SIMD codelets for aligned buffers (every heap vector on
  // mainstream platforms) and a fallback for anything else. ESTIMATE keeps the
  // plan choice, and so the rounding, identical from run to run.
  explicit Fft(std::size_t n) : n_(n) {
    auto* rin = fftw_alloc_real(n);
    auto* cin = fftw_alloc_complex(n);
    auto* cout = fftw_alloc_complex(n);
    const int ni = static_cast<int>(n);
    r2c_ = fftw_plan_dft_r2c_1d(ni, rin, cout, FFTW_ESTIMATE);
    r2c_u_ = fftw_plan_dft_r2c_1d(ni, rin, cout, FFTW_ESTIMATE | FFTW_UNALIGNED);
    c2c_inv_ = fftw_plan_dft_1d(ni, cin, cout, FFTW_BACKWARD, FFTW_ESTIMATE);
    c2c_inv_u_ = fftw_plan_dft_1d(ni, cin, cout, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(rin);
    fftw_free(cin);
    fftw_free(cout);
  }

  static bool aligned(const void* a, const void* b) noexcept {
    return fftw_alignment_of(static_cast<double*>(const_cast<void*>(a))) == 0 &&
           fftw_alignment_of(static_cast<double*>(const_cast<void*>(b))) == 0;
  }

  std::size_t n_;
  fftw_plan r2c_{};
  fftw_plan r2c_u_{};
  fftw_plan c2c_inv_{};
  fftw_plan c2c_inv_u_{};
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Analytic cross-correlations y_t[k] = sum_i x[k+i] * (t[i] + j*H{t}[i]) for
/// k in [0, x.size() - tpl_len], one per template spectrum (forward FFT of
/// the template zero-padded to `fft.size()`). The input is transformed once.
template <std::size_t N>
std::array<std::vector<std::complex<double>>, N> analytic_correlations(
    std::span<const double> x, const std::array<std::span<const std::complex<double>>, N>& tpl_spectra,
    std::size_t tpl_len, const Fft& fft) {
  using Complex = std::complex<double>;
  const std::size_t n = fft.size();
  thread_local std::vector<double> padded;
  thread_local std::vector<Complex> spec, full;
  padded.assign(n, 0.0);
  std::copy(x.begin(), x.end(), padded.begin());
  spec.resize(n / 2 + 1);
  full.resize(n);
  fft.forward(padded, spec);

  const std::size_t valid = x.size() >= tpl_len ? x.size() - tpl_len + 1 : 0;
  const double scale = 1.0 / static_cast<double>(n);
  std::array<std::vector<Complex>, N> result;
  for (std::size_t t = 0; t < N; ++t) {
    const auto& tspec = tpl_spectra[t];
    // X * conj(T) on positive frequencies, doubled; negatives zeroed.
    full[0] = spec[0] * std::conj(tspec[0]);
    for (std::size_t f = 1; f < n / 2; ++f) full[f] = 2.0 * spec[f] * std::conj(tspec[f]);
    full[n / 2] = spec[n / 2] * std::conj(tspec[n / 2]);
    std::fill(full.begin() + static_cast<long>(n / 2) + 1, full.end(), Complex{});
    auto& out = result[t];
    out.resize(n);
    fft.inverse(full, out);
    out.resize(valid);
    for (auto& v : out) v *= scale;
  }
  return result;
}

inline std::vector<std::complex<double>> analytic_correlation(
    std::span<const double> x, std::span<const std::complex<double>> tpl_spectrum,
    std::size_t tpl_len, const Fft& fft) {
  return std::move(analytic_correlations<1>(x, {tpl_spectrum}, tpl_len, fft)[0]);
}

}  // namespace sonicdist::dsp
