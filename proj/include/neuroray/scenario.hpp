#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neuroray/channel.hpp"
#include "neuroray/error.hpp"
#include "neuroray/geometry.hpp"
#include "neuroray/medium.hpp"
#include "neuroray/signal.hpp"

namespace neuroray {

/// One broken invariant, keyed by the dotted scenario field it concerns.
struct Violation {
  std::string field;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// A scenario failed to parse or validate.
class ScenarioError : public InvalidArgument {
 public:
  explicit ScenarioError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// A scenario file could not be read, or an output could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

struct ShapeConfig {
  ShapeKind kind = ShapeKind::fusiform;
  double h_c_um = 30.0;
  double w_c_um = 20.0;
  double r_c_um = 10.0;  // spherical only

  friend bool operator==(const ShapeConfig&, const ShapeConfig&) = default;
};

/// The detector gap is either given directly or implied by a total distance.
struct LayoutConfig {
  int n_cells = 18;
  double d_l_um = 5.0;
  double d_E_um = 5.0;
  std::optional<double> total_distance_um = 450.0;
  std::optional<double> d_R_um;

  friend bool operator==(const LayoutConfig&, const LayoutConfig&) = default;
};

struct PulseConfig {
  double tau_fs = 1.0;
  double dt_fs = 0.05;
  double span_fs = 40.0;
  double e0 = 1.0;

  friend bool operator==(const PulseConfig&, const PulseConfig&) = default;
};

struct SweepConfig {
  std::string parameter;  // dotted scenario key, e.g. layout.n_cells
  std::vector<double> values;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct Scenario {
  ShapeConfig shape;
  LayoutConfig layout;
  MediaPair media = default_media();
  double lambda_nm = 456.0;
  PulseConfig pulse;
  int rays = 1001;
  double cir_dt_fs = 10.0;
  GammaMode gamma_mode = GammaMode::per_path;
  double detector_extent_um = 40.0;  // full transverse extent, centred on the axis
  EstimateOptions deconvolution;
  std::optional<SweepConfig> sweep;
  std::string output_dir = "out";

  friend bool operator==(const Scenario& a, const Scenario& b);

  CellShape cell_shape() const;
  ArrayLayout array_layout() const;
  Wavelength wavelength() const { return {lambda_nm}; }
  ChannelOptions channel_options() const;
  double detector_half_extent_um() const { return detector_extent_um / 2.0; }
};

/// Defaults for each cell shape: an 18-cell array over 450 um.
Scenario default_scenario(ShapeKind kind);

/// Every invariant violation; empty means the scenario is runnable.
std::vector<Violation> validate(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);

/// Parses and validates. Unknown keys and wrong types are violations too.
/// Throws ScenarioError.
Scenario scenario_from_json(const nlohmann::json& doc);

/// Reads a JSON file; throws IoError if unreadable, ScenarioError if malformed.
nlohmann::json read_scenario_json(const std::filesystem::path& path);

/// The scenario at sweep grid point `index`, with the sweep itself removed.
Scenario sweep_point(const Scenario& scenario, std::size_t index);

/// Sets `key=value` on a scenario document. The key is a dotted path; the
/// value is parsed as JSON and otherwise taken as a string. Setting one of
/// layout.total_distance_um and layout.d_R_um removes the other.
void apply_override(nlohmann::json& doc, std::string_view assignment);

}  // namespace neuroray
