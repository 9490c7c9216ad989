#pragma once

#include "neuroray/geometry.hpp"
#include "neuroray/medium.hpp"

namespace neuroray {

/// dB per neper of intensity exponent, 10 / ln 10.
inline constexpr double kDbPerNeper = 4.3429448190325182765;

/// Differential path length factor of the modified Beer-Lambert law.
///
/// DPF(d) = 1/2 sqrt(3 mu_s' / mu_a) [1 - 1 / (1 + d sqrt(3 mu_a mu_s'))],
/// with d in mm. Zero at d = 0, increasing, bounded by dpf_limit().
double dpf(const Medium& medium, double d_mm);

/// Supremum of dpf() as d grows without bound.
double dpf_limit(const Medium& medium);

/// Beer-Lambert exponent mu_a d DPF(d) in nepers.
double attenuation_exponent(const Medium& medium, double d_mm);

/// Intensity transmittance exp(-mu_a d DPF(d)) through `d_mm` of `medium`.
///
/// The coefficients are taken at a single operating wavelength, so `lambda`
/// only documents which one.
double transmittance(const Medium& medium, double d_mm, Wavelength lambda);

/// The three additive pieces of the aggregate path loss, in dB.
struct PathLossTerms {
  double cells_db = 0.0;
  double gaps_db = 0.0;
  double ends_db = 0.0;

  double total_db() const { return cells_db + gaps_db + ends_db; }
};

/// Aggregate path loss of a cell array from the aperture-averaged in-cell and
/// gap distances. Each DPF is evaluated at its own term's distance. The gap
/// term counts max(N - 1, 0) gaps.
PathLossTerms path_loss_terms(const ArrayLayout& layout, const MediaPair& media,
                              Wavelength lambda);

double total_path_loss_db(const ArrayLayout& layout, const MediaPair& media,
                          Wavelength lambda);

}  // namespace neuroray
