#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace neuroray::fft {

/// Forward real transform of `x` zero-padded to `n`; returns n/2 + 1 bins, unscaled.
std::vector<std::complex<double>> forward(std::span<const double> x, std::size_t n);

/// Inverse of forward() for an `n`-point signal, scaled by 1/n.
std::vector<double> inverse(std::span<const std::complex<double>> bins, std::size_t n);

}  // namespace neuroray::fft
