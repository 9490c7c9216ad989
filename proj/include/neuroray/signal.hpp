#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "neuroray/channel.hpp"
#include "neuroray/error.hpp"
#include "neuroray/medium.hpp"

namespace neuroray {

class UnderResolved : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class IllConditioned : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

/// Real, carrier-resolved field samples; sample i sits at t0 + i * dt.
struct Waveform {
  double t0_s = 0.0;
  double dt_s = 0.0;
  std::vector<double> samples;
  double omega0_rad_s = 0.0;
  double tau_s = 0.0;  // envelope FWHM
  double e0 = 0.0;

  double time_s(std::size_t i) const { return t0_s + static_cast<double>(i) * dt_s; }
  /// Sum of x^2 dt.
  double energy() const;
};

/// One-sided discrete spectrum: bin k sits at f0 + k * df and holds
/// dt * DFT(x)[k] of an `n_time`-point transform.
struct Spectrum {
  double f0_hz = 0.0;
  double df_hz = 0.0;
  std::size_t n_time = 0;
  std::vector<std::complex<double>> bins;

  double frequency_hz(std::size_t k) const { return f0_hz + static_cast<double>(k) * df_hz; }
  /// Frequency of the largest |X| above DC.
  double peak_frequency_hz() const;
  /// Energy over the two-sided spectrum, df * sum |X|^2; equals the waveform energy.
  double energy() const;
};

/// Re{E0 exp(-4 ln2 (t/tau)^2 + i w0 t)} sampled on an odd grid centred on t = 0
/// spanning at least `span_s`. Throws UnderResolved if dt >= tau / 10.
Waveform gaussian_pulse(double e0, double tau_s, Wavelength lambda, double dt_s, double span_s);

/// The transmitted pulse delayed by t_d and scaled by gamma * attenuation,
/// evaluated on the transmitted pulse's grid.
Waveform received_pulse(const Waveform& tx, double delay_s, double gamma, double attenuation);

/// Re-deposits every bin of `cir` at the nearest point of a grid of width dt_s.
ImpulseResponse rebin(const ImpulseResponse& cir, double dt_s);

/// Discrete linear convolution of tx with cir; output has
/// tx.size() + cir.size() - 1 samples starting at tx.t0 + cir.t0. A CIR on a
/// different grid is rebinned onto tx.dt first.
Waveform propagate(const Waveform& tx, const ImpulseResponse& cir);

struct EstimateOptions {
  double eps_rel = 1e-6;  // Wiener regulariser as a fraction of max |F(tx)|^2
  bool naive = false;     // plain spectral division
};

/// Channel estimate from F(rx) conj(F(tx)) / (|F(tx)|^2 + eps).
///
/// The regularised estimate is the true response blurred by the estimator's
/// point-spread function; amplitudes are divided by that function's peak so
/// an isolated atom reads its own gain. The estimate is signed and may ring.
/// Throws IllConditioned when |F(tx)|^2 < eps over more than half of the
/// band occupied by rx.
ImpulseResponse estimate_channel(const Waveform& tx, const Waveform& rx,
                                 const EstimateOptions& options = {});

/// Spectrum of `w` zero-padded to `n_fft` points (0: the waveform length).
Spectrum spectrum(const Waveform& w, std::size_t n_fft = 0);

/// |analytic signal| of w, from the one-sided spectrum.
std::vector<double> analytic_envelope(const Waveform& w);

/// Full width at half maximum of the analytic envelope, in seconds.
double envelope_fwhm_s(const Waveform& w);

/// Time of the analytic envelope's maximum.
double envelope_peak_time_s(const Waveform& w);

/// Drops exactly-zero leading and trailing samples.
Waveform trim_zeros(const Waveform& w);

}  // namespace neuroray
