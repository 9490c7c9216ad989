#include "neuroray/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace neuroray {

namespace {

// exp(-4 ln2 (t/tau)^2)
double envelope(double t, double tau) {
  const double u = t / tau;
  return std::exp(-4.0 * std::numbers::ln2 * u * u);
}

double pulse_sample(double amplitude, double t, double tau, double omega0) {
  return amplitude * envelope(t, tau) * std::cos(omega0 * t);
}

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(a, b); }

// Smallest n' >= n of the form 2^a 3^b 5^c 7^d.
std::size_t good_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace

double Waveform::energy() const {
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  return sum * dt_s;
}

double Spectrum::peak_frequency_hz() const {
  if (bins.size() < 2) throw InvalidArgument("spectrum too short for a peak");
  std::size_t best = 1;
  for (std::size_t k = 2; k < bins.size(); ++k) {
    if (std::abs(bins[k]) > std::abs(bins[best])) best = k;
  }
  return frequency_hz(best);
}

double Spectrum::energy() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const bool single = k == 0 || (n_time % 2 == 0 && k == n_time / 2);
    sum += (single ? 1.0 : 2.0) * std::norm(bins[k]);
  }
  return sum * df_hz;
}

Waveform gaussian_pulse(double e0, double tau_s, Wavelength lambda, double dt_s, double span_s) {
  lambda.validate();
  if (!(tau_s > 0.0)) throw InvalidArgument("pulse FWHM must be positive");
  if (!(dt_s > 0.0)) throw InvalidArgument("sample step must be positive");
  if (!(span_s >= 8.0 * tau_s)) throw InvalidArgument("pulse span must be at least 8 tau");
  if (dt_s >= tau_s / 10.0) throw UnderResolved("sample step must be below tau / 10");

  const auto half = static_cast<std::size_t>(std::ceil(span_s / (2.0 * dt_s)));
  Waveform w;
  w.dt_s = dt_s;
  w.t0_s = -static_cast<double>(half) * dt_s;
  w.omega0_rad_s = 2.0 * std::numbers::pi * kSpeedOfLight / lambda.meters();
  w.tau_s = tau_s;
  w.e0 = e0;
  w.samples.resize(2 * half + 1);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) * dt_s;
    w.samples[i] = pulse_sample(e0, t, tau_s, w.omega0_rad_s);
  }
  return w;
}

Waveform received_pulse(const Waveform& tx, double delay_s, double gamma, double attenuation) {
  if (!(delay_s >= 0.0)) throw InvalidArgument("delay must be >= 0");
  Waveform rx = tx;
  const double shift = std::round(delay_s / tx.dt_s);
  rx.t0_s = tx.t0_s + shift * tx.dt_s;
  const double amplitude = gamma * attenuation * tx.e0;
  const auto offset = static_cast<std::int64_t>(std::llround(rx.t0_s / tx.dt_s));
  for (std::size_t i = 0; i < rx.samples.size(); ++i) {
    // Grid times as integer multiples of dt so a zero delay reproduces tx exactly.
    const double t = static_cast<double>(offset + static_cast<std::int64_t>(i)) * tx.dt_s;
    rx.samples[i] = pulse_sample(amplitude, t - delay_s, tx.tau_s, tx.omega0_rad_s);
  }
  return rx;
}

ImpulseResponse rebin(const ImpulseResponse& cir, double dt_s) {
  if (!(dt_s > 0.0)) throw InvalidArgument("bin width must be positive");
  std::vector<std::size_t> index(cir.bins.size());
  std::size_t last = 0;
  for (std::size_t i = 0; i < cir.bins.size(); ++i) {
    index[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * cir.dt_s / dt_s));
    if (cir.bins[i] != 0.0) last = std::max(last, index[i]);
  }
  ImpulseResponse out{cir.t0_s, dt_s, std::vector<double>(last + 1, 0.0)};
  for (std::size_t i = 0; i < cir.bins.size(); ++i) {
    if (cir.bins[i] != 0.0) out.bins[index[i]] += cir.bins[i];
  }
  return out;
}

Waveform propagate(const Waveform& tx, const ImpulseResponse& cir) {
  if (tx.samples.empty() || cir.bins.empty()) throw InvalidArgument("empty waveform or channel");
  if (!same_step(tx.dt_s, cir.dt_s)) return propagate(tx, rebin(cir, tx.dt_s));

  Waveform out = tx;
  out.t0_s = tx.t0_s + cir.t0_s;
  out.samples.assign(tx.samples.size() + cir.bins.size() - 1, 0.0);
  for (std::size_t j = 0; j < cir.bins.size(); ++j) {
    const double g = cir.bins[j];
    if (g == 0.0) continue;
    for (std::size_t i = 0; i < tx.samples.size(); ++i) out.samples[i + j] += g * tx.samples[i];
  }
  return out;
}

ImpulseResponse estimate_channel(const Waveform& tx, const Waveform& rx,
                                 const EstimateOptions& options) {
  if (!same_step(tx.dt_s, rx.dt_s)) throw InvalidArgument("tx and rx must share a sample step");
  if (tx.samples.empty() || rx.samples.size() < tx.samples.size()) {
    throw InvalidArgument("rx must be at least as long as tx");
  }
  const std::size_t n = good_size(rx.samples.size());
  const auto x = fft::forward(tx.samples, n);
  const auto y = fft::forward(rx.samples, n);

  double max_x2 = 0.0;
  double max_y = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    max_x2 = std::max(max_x2, std::norm(x[k]));
    max_y = std::max(max_y, std::abs(y[k]));
  }
  const double threshold = options.eps_rel * max_x2;
  std::size_t occupied = 0;
  std::size_t weak = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::abs(y[k]) < 1e-3 * max_y) continue;
    ++occupied;
    if (std::norm(x[k]) < threshold) ++weak;
  }
  if (max_x2 == 0.0 || 2 * weak > occupied) {
    throw IllConditioned("transmitted spectrum vanishes over most of the received band");
  }

  const double eps = options.naive ? 0.0 : threshold;
  std::vector<std::complex<double>> h(x.size());
  double psf_peak = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x2 = std::norm(x[k]);
    const bool single = k == 0 || (n % 2 == 0 && k == n / 2);
    if (options.naive) {
      if (x2 == 0.0) throw IllConditioned("transmitted spectrum has an exact zero");
      h[k] = y[k] / x[k];
      psf_peak += single ? 1.0 : 2.0;
    } else {
      h[k] = y[k] * std::conj(x[k]) / (x2 + eps);
      psf_peak += (single ? 1.0 : 2.0) * x2 / (x2 + eps);
    }
  }
  psf_peak /= static_cast<double>(n);

  const std::vector<double> full = fft::inverse(h, n);
  ImpulseResponse out;
  out.dt_s = tx.dt_s;
  out.t0_s = rx.t0_s - tx.t0_s;
  out.bins.assign(full.begin(),
                  full.begin() + static_cast<std::ptrdiff_t>(rx.samples.size() - tx.samples.size() + 1));
  for (double& b : out.bins) b /= psf_peak;
  return out;
}

Spectrum spectrum(const Waveform& w, std::size_t n_fft) {
  if (w.samples.empty()) throw InvalidArgument("empty waveform");
  const std::size_t n = std::max(n_fft, w.samples.size());
  Spectrum s;
  s.n_time = n;
  s.f0_hz = 0.0;
  s.df_hz = 1.0 / (static_cast<double>(n) * w.dt_s);
  s.bins = fft::forward(w.samples, n);
  for (auto& b : s.bins) b *= w.dt_s;
  return s;
}

std::vector<double> analytic_envelope(const Waveform& w) {
  const std::size_t n = w.samples.size();
  if (n == 0) return {};
  auto bins = fft::forward(w.samples, n);
  // Hilbert transform: multiply positive frequencies by -i, clear DC and Nyquist.
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const bool single = k == 0 || (n % 2 == 0 && k == n / 2);
    bins[k] = single ? std::complex<double>{} : std::complex<double>{bins[k].imag(), -bins[k].real()};
  }
  const std::vector<double> quad = fft::inverse(bins, n);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::hypot(w.samples[i], quad[i]);
  return env;
}

double envelope_peak_time_s(const Waveform& w) {
  const std::vector<double> env = analytic_envelope(w);
  if (env.empty()) throw InvalidArgument("empty waveform");
  const auto peak = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
  return w.time_s(peak);
}

double envelope_fwhm_s(const Waveform& w) {
  const std::vector<double> env = analytic_envelope(w);
  if (env.empty()) throw InvalidArgument("empty waveform");
  const auto peak = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
  const double half = env[peak] / 2.0;
  std::size_t lo = peak;
  while (lo > 0 && env[lo - 1] >= half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < env.size() && env[hi + 1] >= half) ++hi;
  if (lo == 0 || hi + 1 == env.size()) throw InvalidArgument("envelope does not fall to half maximum");
  // Linear interpolation of the two half-maximum crossings.
  const double left = static_cast<double>(lo) - (env[lo] - half) / (env[lo] - env[lo - 1]);
  const double right = static_cast<double>(hi) + (env[hi] - half) / (env[hi] - env[hi + 1]);
  return (right - left) * w.dt_s;
}

Waveform trim_zeros(const Waveform& w) {
  std::size_t first = 0;
  while (first < w.samples.size() && w.samples[first] == 0.0) ++first;
  std::size_t last = w.samples.size();
  while (last > first && w.samples[last - 1] == 0.0) --last;
  Waveform out = w;
  out.t0_s = w.time_s(first);
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(first),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(last));
  return out;
}

}  // namespace neuroray
