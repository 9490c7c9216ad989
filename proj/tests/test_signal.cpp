#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neuroray/signal.hpp"
#include "oracles.hpp"

using namespace neuroray;
using oracle::rel_err;

namespace {

constexpr double fs = 1e-15;
constexpr double ps = 1e-12;
const Wavelength kBlue{456.0};

Waveform pulse(double tau = 1 * fs) { return gaussian_pulse(1.0, tau, kBlue, 0.05 * fs, 40 * fs); }

ImpulseResponse spikes(double dt, std::vector<std::pair<double, double>> atoms) {
  ImpulseResponse h{0.0, dt, {}};
  for (auto [t, g] : atoms) {
    const auto i = static_cast<std::size_t>(std::llround(t / dt));
    if (h.bins.size() <= i) h.bins.resize(i + 1, 0.0);
    h.bins[i] += g;
  }
  return h;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("gaussian pulse shape") {
  const Waveform w = pulse();
  REQUIRE(w.samples.size() % 2 == 1);
  const std::size_t mid = w.samples.size() / 2;
  CHECK(std::abs(w.time_s(mid)) < 1e-30);
  CHECK(w.samples[mid] == 1.0);
  CHECK(rel_err(w.omega0_rad_s / (2.0 * std::numbers::pi), 657439600877193.0) < 1e-12);
  CHECK(std::abs(envelope_fwhm_s(w) - 1 * fs) <= w.dt_s);
  CHECK(std::abs(envelope_peak_time_s(w)) <= w.dt_s / 2.0);
  CHECK(w.samples.size() * w.dt_s >= 40 * fs);
}

TEST_CASE("pulse preconditions") {
  CHECK_THROWS_AS(gaussian_pulse(1.0, 1 * fs, kBlue, 0.1 * fs, 40 * fs), UnderResolved);
  CHECK_THROWS_AS(gaussian_pulse(1.0, 1 * fs, kBlue, 0.05 * fs, 7 * fs), InvalidArgument);
  CHECK_THROWS_AS(gaussian_pulse(1.0, 0.0, kBlue, 0.05 * fs, 40 * fs), InvalidArgument);
}

TEST_CASE("received pulse") {
  const Waveform tx = pulse();
  const Waveform same = received_pulse(tx, 0.0, 1.0, 1.0);
  CHECK(same.t0_s == tx.t0_s);
  CHECK(same.samples == tx.samples);

  const Waveform late = received_pulse(tx, 2 * ps, 0.8, 0.5);
  CHECK(std::abs(envelope_peak_time_s(late) - 2 * ps) <= tx.dt_s / 2.0 + 1e-30);
  const double peak = *std::max_element(late.samples.begin(), late.samples.end());
  CHECK(peak == doctest::Approx(0.4).epsilon(1e-3));
  CHECK_THROWS_AS(received_pulse(tx, -1.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("propagation through simple channels") {
  const Waveform tx = pulse();
  const Waveform id = propagate(tx, ImpulseResponse{0.0, tx.dt_s, {1.0}});
  CHECK(id.samples == tx.samples);
  CHECK(id.t0_s == tx.t0_s);

  const ImpulseResponse h = spikes(tx.dt_s, {{2 * ps, 0.5}});
  const Waveform rx = propagate(tx, h);
  CHECK(rx.samples.size() == tx.samples.size() + h.bins.size() - 1);
  const std::size_t shift = h.bins.size() - 1;
  for (std::size_t i = 0; i < tx.samples.size(); ++i) {
    CHECK(rx.samples[i + shift] == 0.5 * tx.samples[i]);
  }
  CHECK(std::abs(envelope_peak_time_s(trim_zeros(rx)) - 2 * ps) <= tx.dt_s);
}

TEST_CASE("two paths 0.1 ps apart give two envelope peaks") {
  const Waveform tx = pulse();
  const Waveform rx = trim_zeros(propagate(tx, spikes(tx.dt_s, {{1 * ps, 0.5}, {1.1 * ps, 0.5}})));
  const std::vector<double> env = analytic_envelope(rx);
  const double top = *std::max_element(env.begin(), env.end());
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < env.size(); ++i) {
    if (env[i] > 0.9 * top && env[i] >= env[i - 1] && env[i] > env[i + 1]) peaks.push_back(rx.time_s(i));
  }
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0] - 1 * ps) <= tx.dt_s);
  CHECK(std::abs(peaks[1] - 1.1 * ps) <= tx.dt_s);
}

TEST_CASE("convolution is linear") {
  const Waveform a = pulse();
  Waveform b = gaussian_pulse(0.7, 2 * fs, Wavelength{600.0}, 0.05 * fs, 40 * fs);
  b.samples.resize(a.samples.size());
  const ImpulseResponse h = spikes(a.dt_s, {{3 * fs, 0.3}, {20 * fs, 0.2}, {21 * fs, 0.1}});
  Waveform mix = a;
  for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = 2.0 * a.samples[i] - 3.0 * b.samples[i];
  const Waveform lhs = propagate(mix, h);
  const Waveform ra = propagate(a, h);
  const Waveform rb = propagate(b, h);
  double scale = 0.0;
  for (double x : lhs.samples) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < lhs.samples.size(); ++i) {
    CHECK(std::abs(lhs.samples[i] - (2.0 * ra.samples[i] - 3.0 * rb.samples[i])) <= 1e-12 * scale);
  }
}

TEST_CASE("rebinning keeps the total gain") {
  const ImpulseResponse h = spikes(10 * fs, {{2.03 * ps, 0.2}, {2.04 * ps, 0.05}});
  const ImpulseResponse fine = rebin(h, 0.05 * fs);
  CHECK(fine.total_gain() == doctest::Approx(h.total_gain()).epsilon(1e-15));
  CHECK(std::abs(fine.dominant_time_s() - 2.03 * ps) < 1e-20);
  const Waveform tx = pulse();
  const Waveform direct = propagate(tx, fine);
  const Waveform via = propagate(tx, h);
  CHECK(direct.samples == via.samples);
}

TEST_CASE("Parseval") {
  const Waveform w = pulse();
  for (std::size_t n : {std::size_t{0}, std::size_t{1024}, std::size_t{3001}}) {
    const Spectrum s = spectrum(w, n);
    CHECK(rel_err(s.energy(), w.energy()) < 1e-9);
  }
}

TEST_CASE("spectral peaks") {
  const Waveform carrier = gaussian_pulse(1.0, 300 * fs, kBlue, 0.05 * fs, 2400 * fs);
  const Spectrum s = spectrum(carrier);
  CHECK(std::abs(s.peak_frequency_hz() - kSpeedOfLight / kBlue.meters()) <= s.df_hz);

  const Waveform tx = pulse();
  const Waveform rx = trim_zeros(propagate(tx, spikes(tx.dt_s, {{1 * ps, 0.3}})));
  const std::size_t n = 4096;
  CHECK(spectrum(tx, n).peak_frequency_hz() == spectrum(rx, n).peak_frequency_hz());
}

TEST_CASE("channel estimate of an identity channel") {
  const Waveform tx = pulse();
  const ImpulseResponse h = estimate_channel(tx, tx);
  REQUIRE(h.bins.size() == 1);
  CHECK(std::abs(h.bins[0] - 1.0) < 1e-6);
  // The Gaussian tail underflows to exact zeros near Nyquist, so plain division refuses.
  EstimateOptions naive;
  naive.naive = true;
  CHECK_THROWS_AS(estimate_channel(tx, tx, naive), IllConditioned);
}

TEST_CASE("channel estimate round trip") {
  const Waveform tx = trim_zeros(pulse());
  const ImpulseResponse truth = spikes(tx.dt_s, {{2 * ps, 0.5}});
  const ImpulseResponse est = estimate_channel(tx, propagate(tx, truth));
  const std::size_t peak = argmax(est.bins);
  CHECK(std::abs(est.time_s(peak) - 2 * ps) <= tx.dt_s);
  CHECK(est.bins[peak] == doctest::Approx(0.5).epsilon(0.01));

  const ImpulseResponse multi = spikes(tx.dt_s, {{0.4 * ps, 0.3}, {0.9 * ps, 0.2}, {1.5 * ps, 0.1}});
  const ImpulseResponse got = estimate_channel(tx, propagate(tx, multi));
  for (auto [t, g] : {std::pair{0.4 * ps, 0.3}, {0.9 * ps, 0.2}, {1.5 * ps, 0.1}}) {
    const auto i = static_cast<std::size_t>(std::llround((t - got.t0_s) / got.dt_s));
    CHECK(got.bins[i] == doctest::Approx(g).epsilon(0.01));
  }
}

TEST_CASE("channel estimate is shift covariant") {
  const Waveform tx = trim_zeros(pulse());
  const Waveform rx = propagate(tx, spikes(tx.dt_s, {{0.3 * ps, 0.6}}));
  Waveform tx2 = tx;
  Waveform rx2 = rx;
  tx2.t0_s += 123 * tx.dt_s;
  rx2.t0_s += 123 * tx.dt_s;
  const ImpulseResponse a = estimate_channel(tx, rx);
  const ImpulseResponse b = estimate_channel(tx2, rx2);
  CHECK(std::abs(a.time_s(argmax(a.bins)) - b.time_s(argmax(b.bins))) <= tx.dt_s);
}

TEST_CASE("estimation refuses a transmitter without the received band") {
  const Waveform narrow = gaussian_pulse(1.0, 40 * fs, kBlue, 0.05 * fs, 320 * fs);
  const Waveform broad = gaussian_pulse(1.0, 0.6 * fs, Wavelength{300.0}, 0.05 * fs, 320 * fs);
  CHECK_THROWS_AS(estimate_channel(narrow, broad), IllConditioned);
  CHECK_THROWS_AS(estimate_channel(broad, trim_zeros(broad)), InvalidArgument);
}

TEST_CASE("received energy does not exceed the transmitted energy") {
  const Waveform tx = pulse();
  const ImpulseResponse h = spikes(tx.dt_s, {{0.5 * ps, 0.4}, {0.50005 * ps, 0.3}, {0.6 * ps, 0.2}});
  CHECK(propagate(tx, h).energy() <= tx.energy());
}

TEST_CASE("trim zeros") {
  Waveform w;
  w.dt_s = 1.0;
  w.t0_s = -2.0;
  w.samples = {0.0, 0.0, 1.0, 0.0, 2.0, 0.0};
  const Waveform t = trim_zeros(w);
  CHECK(t.t0_s == 0.0);
  CHECK(t.samples == std::vector<double>{1.0, 0.0, 2.0});
}
