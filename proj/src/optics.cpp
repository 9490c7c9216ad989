#include "neuroray/optics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuroray/error.hpp"

namespace neuroray {

void Medium::validate() const {
  if (!(n >= 1.0) || !std::isfinite(n)) throw InvalidArgument("refractive index must be >= 1");
  if (!(mu_a_per_mm > 0.0) || !std::isfinite(mu_a_per_mm)) {
    throw InvalidArgument("mu_a must be positive");
  }
  if (!(mu_s_prime_per_mm > 0.0) || !std::isfinite(mu_s_prime_per_mm)) {
    throw InvalidArgument("mu_s' must be positive");
  }
}

void Wavelength::validate() const {
  if (!(nm > 0.0) || !std::isfinite(nm)) throw InvalidArgument("wavelength must be positive");
}

void MediaPair::validate() const {
  cell.validate();
  tissue.validate();
}

MediaPair default_media() {
  return MediaPair{Medium{1.36, 0.9, 3.43}, Medium{1.35, 1.34, 3.43}};
}

double dpf_limit(const Medium& m) {
  return 0.5 * std::sqrt(3.0 * m.mu_s_prime_per_mm / m.mu_a_per_mm);
}

double dpf(const Medium& m, double d_mm) {
  if (!(d_mm >= 0.0)) throw InvalidArgument("DPF distance must be >= 0");
  const double k = std::sqrt(3.0 * m.mu_a_per_mm * m.mu_s_prime_per_mm);
  // 1 - 1/(1 + kd) written as kd/(1 + kd) to keep precision near d = 0.
  return dpf_limit(m) * (k * d_mm / (1.0 + k * d_mm));
}

double attenuation_exponent(const Medium& m, double d_mm) {
  return m.mu_a_per_mm * d_mm * dpf(m, d_mm);
}

double transmittance(const Medium& m, double d_mm, Wavelength /*lambda*/) {
  return std::exp(-attenuation_exponent(m, d_mm));
}

PathLossTerms path_loss_terms(const ArrayLayout& layout, const MediaPair& media,
                              Wavelength lambda) {
  layout.validate();
  media.validate();
  lambda.validate();
  const AverageDistances avg = avg_distances(layout.shape, layout.gap_um);
  const double n = static_cast<double>(layout.n_cells);
  const double gaps = std::max(n - 1.0, 0.0);
  const double d_cell = um_to_mm(avg.in_cell_um);
  const double d_gap = um_to_mm(avg.between_cells_um);
  const double d_ends = um_to_mm(layout.source_gap_um + layout.detector_gap_um);

  PathLossTerms t;
  t.cells_db = kDbPerNeper * n * attenuation_exponent(media.cell, d_cell);
  t.gaps_db = kDbPerNeper * gaps * attenuation_exponent(media.tissue, d_gap);
  t.ends_db = kDbPerNeper * attenuation_exponent(media.tissue, d_ends);
  return t;
}

double total_path_loss_db(const ArrayLayout& layout, const MediaPair& media, Wavelength lambda) {
  return path_loss_terms(layout, media, lambda).total_db();
}

}  // namespace neuroray
