#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "neuroray/error.hpp"
#include "neuroray/geometry.hpp"
#include "neuroray/medium.hpp"

namespace neuroray {

class PathOutsideDetector : public Error {
 public:
  using Error::Error;
};

class EmptyChannel : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class DegenerateFocus : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

/// Discretised channel impulse response. Bin i covers delays around
/// t0 + i * dt; a delay t lands in bin round((t - t0) / dt).
struct ImpulseResponse {
  double t0_s = 0.0;
  double dt_s = 0.0;
  std::vector<double> bins;

  double time_s(std::size_t i) const { return t0_s + static_cast<double>(i) * dt_s; }
  double total_gain() const;
  std::size_t dominant_index() const;
  double dominant_time_s() const { return time_s(dominant_index()); }
};

/// One detected ray reduced to a delayed, attenuated delta.
struct PathContribution {
  double delay_s = 0.0;
  double gain = 0.0;
  std::size_t ray_index = 0;
  double detector_coordinate_um = 0.0;
  double cell_um = 0.0;
  double tissue_um = 0.0;
};

/// How the focusing ratio enters the channel. In per_path mode the density
/// of ray arrivals already carries focusing; aggregate multiplies the whole
/// response by (r_E / r_D)^2.
enum class GammaMode { per_path, aggregate };

std::string_view to_string(GammaMode mode);
std::optional<GammaMode> parse_gamma_mode(std::string_view name);

inline constexpr double kRadiusFloorUm = 1e-3;

/// Delay and gain of one path. Per-medium distances are summed before the
/// DPF is applied. Throws PathOutsideDetector when the ray misses the
/// detector (|h| > half extent) and InvalidArgument for a leaked ray.
PathContribution path_contribution(const RayPath& path, std::size_t ray_index,
                                   const MediaPair& media, Wavelength lambda,
                                   double detector_half_extent_um);

/// Delay of a straight run through one medium.
double straight_delay_s(double length_um, const Medium& medium);

struct Contributions {
  std::vector<PathContribution> detected;
  std::vector<std::size_t> outside_detector;  // ray indices that reached the plane but missed
  std::size_t bundle_size = 0;

  double received_fraction() const;
};

Contributions collect_contributions(const TraceResult& trace, const MediaPair& media,
                                    Wavelength lambda, double detector_half_extent_um);

/// Deposits gain / K of every contribution into a grid of width dt starting
/// at t0 = 0, scaled by `scale`. Throws EmptyChannel if nothing was detected.
ImpulseResponse deposit(const Contributions& contributions, double dt_s, double scale = 1.0);

struct ChannelOptions {
  double dt_s = 10e-15;
  GammaMode gamma_mode = GammaMode::per_path;
  double detector_half_extent_um = 20.0;
};

/// Per-stage focusing ratios (r_in / r_out)^2 along the illumination radii
/// r_E, r_1 .. r_m, r_D. Their product is (r_E / r_D)^2. Throws
/// DegenerateFocus when a radius falls below `floor_um`.
std::vector<double> focusing_gain(const FocusReport& focus, double floor_um = kRadiusFloorUm);

/// (r_E / r_D)^2, the cumulative focusing ratio.
double cumulative_focusing_gain(const FocusReport& focus, double floor_um = kRadiusFloorUm);

ImpulseResponse build_cir(const TraceResult& trace, const MediaPair& media, Wavelength lambda,
                          const ChannelOptions& options);

/// Elementwise |h|^2 on the same bin grid.
ImpulseResponse power_delay_profile(const ImpulseResponse& cir);

struct DetectorSample {
  double coordinate_um = 0.0;
  double power_norm = 0.0;  // gain relative to the strongest detected ray
  double delay_s = 0.0;
  std::size_t ray_index = 0;
};

struct DetectorMap {
  double half_extent_um = 0.0;
  std::vector<DetectorSample> samples;  // sorted by coordinate

  /// Coordinate of the strongest arrival.
  double max_power_coordinate_um() const;
  /// Number of groups of arrivals separated by coordinate gaps wider than `gap_um`.
  std::size_t cluster_count(double gap_um) const;
};

DetectorMap detector_map(const Contributions& contributions, double detector_half_extent_um);

}  // namespace neuroray
