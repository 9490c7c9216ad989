#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace neuroray::fft {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct Plan {
  fftw_plan plan;
  explicit Plan(fftw_plan p) : plan(p) {
    if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
  }
  ~Plan() { fftw_destroy_plan(plan); }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
};

}  // namespace

std::vector<std::complex<double>> forward(std::span<const double> x, std::size_t n) {
  if (n == 0 || x.size() > n) throw std::invalid_argument("fft length shorter than signal");
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  const int len = static_cast<int>(n);
  const Plan plan(fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE));
  std::fill(in.get(), in.get() + n, 0.0);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.plan);
  std::vector<std::complex<double>> bins(n / 2 + 1);
  for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out[k][0], out[k][1]};
  return bins;
}

std::vector<double> inverse(std::span<const std::complex<double>> bins, std::size_t n) {
  if (n == 0 || bins.size() != n / 2 + 1) throw std::invalid_argument("bin count mismatch");
  auto in = allocate<fftw_complex>(bins.size());
  auto out = allocate<double>(n);
  const int len = static_cast<int>(n);
  // c2r overwrites its input, so the plan is made after the buffer exists and filled after.
  const Plan plan(fftw_plan_dft_c2r_1d(len, in.get(), out.get(), FFTW_ESTIMATE));
  for (std::size_t k = 0; k < bins.size(); ++k) {
    in[k][0] = bins[k].real();
    in[k][1] = bins[k].imag();
  }
  fftw_execute(plan.plan);
  std::vector<double> x(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = out[i] * scale;
  return x;
}

}  // namespace neuroray::fft
