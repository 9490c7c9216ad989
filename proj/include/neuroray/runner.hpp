#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neuroray/channel.hpp"
#include "neuroray/geometry.hpp"
#include "neuroray/scenario.hpp"
#include "neuroray/signal.hpp"

namespace neuroray {

enum class Command { trace, pathloss, cir, pulse, detector, sweep, validate };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

/// Trace, contributions and impulse response of one scenario.
struct ChannelAnalysis {
  TraceResult trace;
  Contributions contributions;
  double gamma = 1.0;  // scale applied to the response (1 in per-path mode)
  ImpulseResponse cir;
};

ChannelAnalysis analyse_channel(const Scenario& scenario);

struct PulseAnalysis {
  Waveform tx;
  Waveform rx;  // tx through the binned channel, exact-zero tails trimmed
  Spectrum tx_spectrum;
  Spectrum rx_spectrum;  // same transform length as tx_spectrum
  ImpulseResponse estimate;
  double attenuation = 0.0;     // 1 - gamma * received fraction
  double power_fraction = 0.0;  // peak |rx| / E0
};

PulseAnalysis analyse_pulse(const Scenario& scenario, const ChannelAnalysis& channel);

/// Minimum coordinate gap separating two clusters on the detector map:
/// ten entrance ray pitches.
double cluster_gap_um(const Scenario& scenario);

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string content;
};

struct RunReport {
  Command command = Command::cir;
  nlohmann::json scenario;
  std::optional<double> path_loss_db;         // aggregate closed-form model
  std::optional<double> traced_path_loss_db;  // -10 log10 of the received fraction
  std::optional<double> dominant_delay_s;
  std::optional<double> received_fraction;
  std::size_t arrived = 0;
  std::size_t leaked = 0;
  std::size_t deviated = 0;
  std::size_t outside_detector = 0;
  std::optional<int> bundle_exit_cells;
  nlohmann::json details = nlohmann::json::object();
  std::vector<Violation> violations;
  std::vector<std::string> files;

  nlohmann::json to_json() const;
};

struct RunOutput {
  RunReport report;
  std::vector<OutputFile> files;
};

/// Runs one command fully in memory. Nothing is written, so a failure part
/// way through a sweep leaves no partial results.
RunOutput run(Command command, const Scenario& scenario);

/// Writes every file plus report.json under `dir`. Throws IoError.
void write_outputs(const RunOutput& output, const std::filesystem::path& dir);

}  // namespace neuroray
