#pragma once

namespace neuroray {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline constexpr double um_to_mm(double um) { return um * 1e-3; }
inline constexpr double um_to_m(double um) { return um * 1e-6; }

/// Optical constants of one homogeneous substance. Coefficients are per mm.
struct Medium {
  double n = 1.0;
  double mu_a_per_mm = 0.0;
  double mu_s_prime_per_mm = 0.0;

  /// Throws InvalidArgument unless n >= 1 and both coefficients are positive.
  void validate() const;

  /// Phase velocity c/n in m/s.
  double velocity() const { return kSpeedOfLight / n; }
};

struct Wavelength {
  double nm = 456.0;

  void validate() const;
  double meters() const { return nm * 1e-9; }
};

/// The two substances of a cell array: cell interior and interstitial tissue.
struct MediaPair {
  Medium cell;
  Medium tissue;

  void validate() const;
};

/// Cortical cell and tissue constants at 456 nm.
MediaPair default_media();

}  // namespace neuroray
