// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "urllc/core/parallel.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/trajectory.hpp"

namespace urllc::fading {

enum class Window { Hann, Rectangular };

// One-sided spectrum over spatial frequency (cycles/m).
struct Spectrum {
  std::vector<double> frequencies;
  std::vector<double> power_density;
  double bin_width = 0.0;
  double total_energy = 0.0;

  double integral() const {
    CompensatedSum<double> s;
    for (double p : power_density) s += p * bin_width;
    return s.value();
  }

  // Fraction of energy at spatial frequencies <= edge.
  double band_fraction(double edge) const {
    CompensatedSum<double> s;
    for (std::size_t k = 0; k < frequencies.size() && frequencies[k] <= edge; ++k)
      s += power_density[k] * bin_width;
    return s.value() / total_energy;
  }
};

struct PsdOptions {
  double speed = 10.0;
  double duration = 1.0;       // seconds per trace
  double sample_rate = 4000.0; // Hz
  std::size_t n_traces = 100;
  Window window = Window::Hann;
  std::size_t segment_length = 0;  // 0: half the trace
};

struct PsdEstimate {
  Spectrum spectrum;
  double trace_variance = 0.0;
  std::size_t segments = 0;
};

namespace dsp {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    buf_ = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  void run() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_complex* buf_;
  fftw_plan plan_;
};

inline std::vector<double> window_taps(Window w, std::size_t n) {
  std::vector<double> t(n, 1.0);
  if (w == Window::Hann)
    for (std::size_t i = 0; i < n; ++i)
      t[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return t;
}

}  // namespace dsp

// Welch estimate over independent ensemble traces, 50% overlap, per-segment
// mean removal.
inline PsdEstimate psd_estimate(const EnsembleSpec& spec, const PsdOptions& o,
                                const Parallelism& par = {}) {
  spec.validate();
  const double lambda = spec.wavelength();
  const double fd = o.speed / lambda;
  detail::require(o.speed > 0.0, "psd: speed must be > 0");
  if (!(o.sample_rate > 20.0 * fd))
    throw InvalidArgument("psd: sample rate must exceed 20x the Doppler frequency v/lambda (" +
                          std::to_string(20.0 * fd) + " Hz) to resolve super-Doppler content");
  if (!(o.duration * o.speed >= 100.0 * lambda))
    throw InvalidArgument("psd: trace must cover at least 100 wavelengths (duration*speed >= " +
                          std::to_string(100.0 * lambda) + " m)");
  detail::require(o.n_traces >= 1, "psd: n_traces must be >= 1");

  const auto n = static_cast<std::size_t>(std::llround(o.duration * o.sample_rate));
  const std::size_t len = o.segment_length ? o.segment_length : n / 2;
  detail::require(len >= 8 && len <= n, "psd: segment length must be in [8, samples]");
  const std::size_t step = len / 2;
  const std::size_t nseg = (n - len) / step + 1;
  const auto taps = dsp::window_taps(o.window, len);
  double wpow = 0.0;
  for (double t : taps) wpow += t * t;
  const auto times = uniform_times(0.0, 1.0 / o.sample_rate, n);
  const double path = o.speed * times.back();

  struct Part {
    std::vector<double> p;
    double var = 0.0;
  };
  auto acc = chunked_reduce<Part>(
      o.n_traces, Parallelism{par.threads, 4},
      [&](std::uint64_t lo, std::uint64_t hi) {
        Part part;
        part.p.assign(len, 0.0);
        dsp::Fft fft(len);
        for (std::uint64_t i = lo; i < hi; ++i) {
          const auto m = ensemble_member(spec, i, path);
          const auto tr = channel_trace(m.env, {m.rx.start, o.speed, m.rx.heading}, times);
          std::complex<double> mean{0.0, 0.0};
          for (const auto& h : tr.coefficients) mean += h;
          mean /= static_cast<double>(n);
          double v = 0.0;
          for (const auto& h : tr.coefficients) v += std::norm(h - mean);
          part.var += v / static_cast<double>(n);
          for (std::size_t s = 0; s < nseg; ++s) {
            const auto* x = tr.coefficients.data() + s * step;
            std::complex<double> mu{0.0, 0.0};
            for (std::size_t k = 0; k < len; ++k) mu += x[k];
            mu /= static_cast<double>(len);
            auto* y = fft.data();
            for (std::size_t k = 0; k < len; ++k) y[k] = (x[k] - mu) * taps[k];
            fft.run();
            for (std::size_t k = 0; k < len; ++k) part.p[k] += std::norm(y[k]);
          }
        }
        return part;
      },
      [](Part& a, Part& b) {
        if (a.p.empty()) a.p.assign(b.p.size(), 0.0);
        for (std::size_t k = 0; k < b.p.size(); ++k) a.p[k] += b.p[k];
        a.var += b.var;
      });

  // Two-sided density in 1/Hz, folded to one side, then rescaled to cycles/m.
  const double norm = 1.0 / (o.sample_rate * wpow * static_cast<double>(nseg * o.n_traces));
  PsdEstimate out;
  out.segments = nseg * o.n_traces;
  out.trace_variance = acc.var / static_cast<double>(o.n_traces);
  Spectrum& sp = out.spectrum;
  const double df = o.sample_rate / static_cast<double>(len);
  sp.bin_width = df / o.speed;
  const std::size_t half = len / 2;
  for (std::size_t k = 0; k <= half; ++k) {
    double p = acc.p[k];
    if (k > 0 && !(len % 2 == 0 && k == half)) p += acc.p[len - k];
    sp.frequencies.push_back(static_cast<double>(k) * df / o.speed);
    sp.power_density.push_back(p * norm * o.speed);
  }
  sp.total_energy = sp.integral();
  return out;
}

// Smallest band [0, B] holding `fraction` of the energy, interpolating
// linearly between cumulative bin edges.
inline double energy_bandwidth(const Spectrum& sp, double fraction) {
  detail::require(fraction > 0.0 && fraction < 1.0, "bandwidth fraction must be in (0, 1)");
  detail::require(sp.total_energy > 0.0, "spectrum has no energy");
  const double target = fraction * sp.total_energy;
  double cum = 0.0;
  for (std::size_t k = 0; k < sp.frequencies.size(); ++k) {
    const double next = cum + sp.power_density[k] * sp.bin_width;
    if (next >= target) {
      if (k == 0) return sp.frequencies[0];
      const double f0 = sp.frequencies[k - 1], f1 = sp.frequencies[k];
      return f0 + (f1 - f0) * (target - cum) / (next - cum);
    }
    cum = next;
  }
  return sp.frequencies.back();
}

// Least-squares slope of 10 log10(PSD) against log10(f) over [f_lo, f_hi].
inline double tail_slope_db_per_decade(const Spectrum& sp, double f_lo, double f_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < sp.frequencies.size(); ++k) {
    const double f = sp.frequencies[k];
    if (f < f_lo || f > f_hi || !(sp.power_density[k] > 0.0)) continue;
    const double x = std::log10(f), y = 10.0 * std::log10(sp.power_density[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  detail::require(m >= 3, "tail fit needs at least 3 bins");
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

}  // namespace urllc::fading
