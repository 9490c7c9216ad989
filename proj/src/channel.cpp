#include "neuroray/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuroray/optics.hpp"

namespace neuroray {

std::string_view to_string(GammaMode mode) {
  return mode == GammaMode::per_path ? "per-path" : "aggregate";
}

std::optional<GammaMode> parse_gamma_mode(std::string_view name) {
  if (name == "per-path") return GammaMode::per_path;
  if (name == "aggregate") return GammaMode::aggregate;
  return std::nullopt;
}

double ImpulseResponse::total_gain() const {
  double sum = 0.0;
  for (double b : bins) sum += b;
  return sum;
}

std::size_t ImpulseResponse::dominant_index() const {
  if (bins.empty()) throw EmptyChannel("impulse response has no bins");
  return static_cast<std::size_t>(std::max_element(bins.begin(), bins.end()) - bins.begin());
}

double straight_delay_s(double length_um, const Medium& medium) {
  return um_to_m(length_um) / medium.velocity();
}

PathContribution path_contribution(const RayPath& path, std::size_t ray_index,
                                   const MediaPair& media, Wavelength lambda,
                                   double detector_half_extent_um) {
  if (!path.reaches_detector_plane()) {
    throw InvalidArgument("leaked ray has no channel contribution");
  }
  if (std::abs(path.exit.h_um) > detector_half_extent_um) {
    throw PathOutsideDetector("ray " + std::to_string(ray_index) + " misses the detector");
  }
  PathContribution c;
  c.ray_index = ray_index;
  c.detector_coordinate_um = path.exit.h_um;
  c.cell_um = path.length_um(MediumTag::cell);
  c.tissue_um = path.length_um(MediumTag::tissue);
  c.delay_s = straight_delay_s(c.cell_um, media.cell) + straight_delay_s(c.tissue_um, media.tissue);
  c.gain = transmittance(media.cell, um_to_mm(c.cell_um), lambda) *
           transmittance(media.tissue, um_to_mm(c.tissue_um), lambda);
  return c;
}

double Contributions::received_fraction() const {
  if (bundle_size == 0) return 0.0;
  double sum = 0.0;
  for (const PathContribution& c : detected) sum += c.gain;
  return sum / static_cast<double>(bundle_size);
}

Contributions collect_contributions(const TraceResult& trace, const MediaPair& media,
                                    Wavelength lambda, double detector_half_extent_um) {
  if (!(detector_half_extent_um > 0.0)) throw InvalidArgument("detector extent must be positive");
  Contributions out;
  out.bundle_size = trace.paths.size();
  for (std::size_t i = 0; i < trace.paths.size(); ++i) {
    const RayPath& p = trace.paths[i];
    if (!p.reaches_detector_plane()) continue;
    try {
      out.detected.push_back(path_contribution(p, i, media, lambda, detector_half_extent_um));
    } catch (const PathOutsideDetector&) {
      out.outside_detector.push_back(i);
    }
  }
  return out;
}

ImpulseResponse deposit(const Contributions& contributions, double dt_s, double scale) {
  if (!(dt_s > 0.0)) throw InvalidArgument("bin width must be positive");
  if (contributions.detected.empty()) throw EmptyChannel("no ray reaches the detector");
  const double k = static_cast<double>(contributions.bundle_size);

  std::vector<std::size_t> index(contributions.detected.size());
  std::size_t last = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    index[i] = static_cast<std::size_t>(std::llround(contributions.detected[i].delay_s / dt_s));
    last = std::max(last, index[i]);
  }
  ImpulseResponse cir{0.0, dt_s, std::vector<double>(last + 1, 0.0)};
  for (std::size_t i = 0; i < index.size(); ++i) {
    cir.bins[index[i]] += scale * contributions.detected[i].gain / k;
  }
  return cir;
}

std::vector<double> focusing_gain(const FocusReport& focus, double floor_um) {
  std::vector<double> radii;
  radii.push_back(focus.source_radius_um);
  for (const CellFocus& c : focus.cells) radii.push_back(c.illumination_radius_um);
  radii.push_back(focus.detector_radius_um);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= floor_um)) {
      throw DegenerateFocus("illumination radius " + std::to_string(radii[i]) +
                            " um is below the floor at stage " + std::to_string(i));
    }
  }
  std::vector<double> stages;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double ratio = radii[i - 1] / radii[i];
    stages.push_back(ratio * ratio);
  }
  return stages;
}

double cumulative_focusing_gain(const FocusReport& focus, double floor_um) {
  focusing_gain(focus, floor_um);  // validates every stage
  const double ratio = focus.source_radius_um / focus.detector_radius_um;
  return ratio * ratio;
}

ImpulseResponse build_cir(const TraceResult& trace, const MediaPair& media, Wavelength lambda,
                          const ChannelOptions& options) {
  const Contributions c =
      collect_contributions(trace, media, lambda, options.detector_half_extent_um);
  const double scale =
      options.gamma_mode == GammaMode::aggregate ? cumulative_focusing_gain(trace.focus) : 1.0;
  return deposit(c, options.dt_s, scale);
}

ImpulseResponse power_delay_profile(const ImpulseResponse& cir) {
  ImpulseResponse pdp{cir.t0_s, cir.dt_s, cir.bins};
  for (double& b : pdp.bins) b *= b;
  return pdp;
}

double DetectorMap::max_power_coordinate_um() const {
  if (samples.empty()) throw EmptyChannel("detector map is empty");
  const auto it = std::max_element(samples.begin(), samples.end(),
                                   [](const DetectorSample& a, const DetectorSample& b) {
                                     return a.power_norm < b.power_norm;
                                   });
  return it->coordinate_um;
}

std::size_t DetectorMap::cluster_count(double gap_um) const {
  if (samples.empty()) return 0;
  std::size_t clusters = 1;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].coordinate_um - samples[i - 1].coordinate_um > gap_um) ++clusters;
  }
  return clusters;
}

DetectorMap detector_map(const Contributions& contributions, double detector_half_extent_um) {
  if (!(detector_half_extent_um > 0.0)) throw InvalidArgument("detector extent must be positive");
  DetectorMap map;
  map.half_extent_um = detector_half_extent_um;
  double strongest = 0.0;
  for (const PathContribution& c : contributions.detected) strongest = std::max(strongest, c.gain);
  for (const PathContribution& c : contributions.detected) {
    if (std::abs(c.detector_coordinate_um) > detector_half_extent_um) continue;
    map.samples.push_back({c.detector_coordinate_um, c.gain / strongest, c.delay_s, c.ray_index});
  }
  std::stable_sort(map.samples.begin(), map.samples.end(),
                   [](const DetectorSample& a, const DetectorSample& b) {
                     return a.coordinate_um < b.coordinate_um;
                   });
  return map;
}

}  // namespace neuroray
