#include "neuroray/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "neuroray/csv.hpp"
#include "neuroray/optics.hpp"

namespace neuroray {

using nlohmann::json;

namespace {

constexpr double kProfileBinUm = 0.5;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double traced_loss_db(double fraction) { return -10.0 * std::log10(fraction); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fill_trace_counts(RunReport& report, const TraceResult& trace) {
  report.arrived = trace.count(PathStatus::arrived);
  report.leaked = trace.count(PathStatus::leaked);
  report.deviated = trace.count(PathStatus::deviated);
  report.bundle_exit_cells = trace.bundle_exit_cells();
}

void fill_channel(RunReport& report, const ChannelAnalysis& channel) {
  fill_trace_counts(report, channel.trace);
  report.outside_detector = channel.contributions.outside_detector.size();
  report.received_fraction = channel.contributions.received_fraction();
  report.traced_path_loss_db = traced_loss_db(*report.received_fraction);
  report.dominant_delay_s = channel.cir.dominant_time_s();
  report.details["gamma"] = channel.gamma;
}

std::string cir_csv(const ImpulseResponse& cir) {
  csv::Table t({"time_s", "amplitude"});
  for (std::size_t i = 0; i < cir.bins.size(); ++i) t.add({cir.time_s(i), cir.bins[i]});
  return t.str();
}

std::string pdp_csv(const ImpulseResponse& pdp) {
  csv::Table t({"time_s", "power"});
  for (std::size_t i = 0; i < pdp.bins.size(); ++i) t.add({pdp.time_s(i), pdp.bins[i]});
  return t.str();
}

std::string waveform_csv(const Waveform& w) {
  csv::Table t({"time_s", "field"});
  for (std::size_t i = 0; i < w.samples.size(); ++i) t.add({w.time_s(i), w.samples[i]});
  return t.str();
}

void add_file(RunOutput& out, std::string name, std::string content) {
  out.report.files.push_back(name);
  out.files.push_back({std::move(name), std::move(content)});
}

void run_trace(const Scenario& s, RunOutput& out) {
  const ArrayLayout layout = s.array_layout();
  const auto bundle = collimated_bundle(layout.shape, static_cast<std::size_t>(s.rays));
  const TraceResult trace = trace_array(layout, s.media, bundle);
  fill_trace_counts(out.report, trace);

  const Contributions c =
      collect_contributions(trace, s.media, s.wavelength(), s.detector_half_extent_um());
  out.report.outside_detector = c.outside_detector.size();
  out.report.received_fraction = c.received_fraction();

  csv::Table rays({"ray_index", "source_h_um", "status", "loss_cell", "cells_traversed", "cell_um",
                   "tissue_um", "exit_x_um", "exit_h_um", "exit_theta_rad"});
  csv::Table points({"ray_index", "point_index", "x_um", "h_um"});
  for (std::size_t i = 0; i < trace.paths.size(); ++i) {
    const RayPath& p = trace.paths[i];
    const auto idx = static_cast<long long>(i);
    rays.add({idx, p.source_h_um, std::string(to_string(p.status)), static_cast<long long>(p.loss_cell),
              static_cast<long long>(p.cells_traversed), p.length_um(MediumTag::cell),
              p.length_um(MediumTag::tissue), p.exit.x_um, p.exit.h_um, p.exit.theta_rad});
    for (std::size_t j = 0; j < p.trace.size(); ++j) {
      points.add({idx, static_cast<long long>(j), p.trace[j].x_um, p.trace[j].h_um});
    }
  }

  csv::Table focus({"stage", "illumination_radius_um", "focus_angle_rad", "focus_distance_um",
                    "rays_in_line"});
  const double nan = std::nan("");
  const auto bundle_size = static_cast<long long>(trace.paths.size());
  focus.add({std::string("source"), trace.focus.source_radius_um, nan, nan, bundle_size});
  for (std::size_t i = 0; i < trace.focus.cells.size(); ++i) {
    const CellFocus& f = trace.focus.cells[i];
    focus.add({"cell_" + std::to_string(i + 1), f.illumination_radius_um,
               f.focus_angle_rad.value_or(nan), f.focus_distance_um.value_or(nan),
               static_cast<long long>(f.rays_in_line)});
  }
  focus.add({std::string("detector"), trace.focus.detector_radius_um, nan, nan,
             static_cast<long long>(trace.paths.size() - trace.count(PathStatus::leaked))});

  add_file(out, "rays.csv", rays.str());
  add_file(out, "ray_points.csv", points.str());
  add_file(out, "focus.csv", focus.str());
}

void run_pathloss(const Scenario& s, RunOutput& out) {
  const ArrayLayout full = s.array_layout();
  const auto bundle = collimated_bundle(full.shape, static_cast<std::size_t>(s.rays));

  csv::Table t({"n_cells", "distance_um", "cells_db", "gaps_db", "ends_db", "analytic_db",
                "traced_db", "received_fraction"});
  auto add_row = [&](const ArrayLayout& layout) {
    const PathLossTerms terms = path_loss_terms(layout, s.media, s.wavelength());
    const TraceResult trace = trace_array(layout, s.media, bundle);
    const double fraction =
        collect_contributions(trace, s.media, s.wavelength(), s.detector_half_extent_um())
            .received_fraction();
    t.add({static_cast<long long>(layout.n_cells), layout.total_length_um(), terms.cells_db,
           terms.gaps_db, terms.ends_db, terms.total_db(), traced_loss_db(fraction), fraction});
    return std::pair{terms.total_db(), fraction};
  };

  // Detector placed just after each successive cell, then at the configured plane.
  for (int k = 0; k < full.n_cells; ++k) {
    ArrayLayout partial = full;
    partial.n_cells = k;
    partial.detector_gap_um = 0.0;
    add_row(partial);
  }
  const auto [loss, fraction] = add_row(full);
  out.report.path_loss_db = loss;
  out.report.received_fraction = fraction;
  out.report.traced_path_loss_db = traced_loss_db(fraction);
  add_file(out, "pathloss.csv", t.str());
}

void run_cir(const Scenario& s, RunOutput& out) {
  const ChannelAnalysis channel = analyse_channel(s);
  fill_channel(out.report, channel);
  out.report.path_loss_db = total_path_loss_db(s.array_layout(), s.media, s.wavelength());

  csv::Table paths({"ray_index", "detector_coordinate_um", "delay_s", "gain", "cell_um", "tissue_um"});
  for (const PathContribution& c : channel.contributions.detected) {
    paths.add({static_cast<long long>(c.ray_index), c.detector_coordinate_um, c.delay_s, c.gain,
               c.cell_um, c.tissue_um});
  }
  add_file(out, "cir.csv", cir_csv(channel.cir));
  add_file(out, "pdp.csv", pdp_csv(power_delay_profile(channel.cir)));
  add_file(out, "paths.csv", paths.str());
}

void run_pulse(const Scenario& s, RunOutput& out) {
  const ChannelAnalysis channel = analyse_channel(s);
  fill_channel(out.report, channel);
  const PulseAnalysis p = analyse_pulse(s, channel);

  const double tx_peak = p.tx_spectrum.peak_frequency_hz();
  const double rx_peak = p.rx_spectrum.peak_frequency_hz();
  out.report.details["tx_peak_frequency_hz"] = tx_peak;
  out.report.details["rx_peak_frequency_hz"] = rx_peak;
  out.report.details["frequency_step_hz"] = p.tx_spectrum.df_hz;
  out.report.details["attenuation"] = p.attenuation;
  out.report.details["peak_field_fraction"] = p.power_fraction;
  out.report.details["rx_envelope_peak_s"] = envelope_peak_time_s(p.rx);
  out.report.details["tx_envelope_fwhm_s"] = envelope_fwhm_s(p.tx);
  out.report.details["rx_envelope_fwhm_s"] = envelope_fwhm_s(p.rx);
  out.report.details["estimate_peak_s"] =
      p.estimate.time_s(static_cast<std::size_t>(
          std::max_element(p.estimate.bins.begin(), p.estimate.bins.end()) - p.estimate.bins.begin()));

  csv::Table spectra({"frequency_hz", "tx_magnitude", "rx_magnitude"});
  for (std::size_t k = 0; k < p.tx_spectrum.bins.size(); ++k) {
    spectra.add({p.tx_spectrum.frequency_hz(k), std::abs(p.tx_spectrum.bins[k]),
                 std::abs(p.rx_spectrum.bins[k])});
  }
  add_file(out, "tx.csv", waveform_csv(p.tx));
  add_file(out, "rx.csv", waveform_csv(p.rx));
  add_file(out, "spectra.csv", spectra.str());
  add_file(out, "estimate.csv", cir_csv(p.estimate));
}

void run_detector(const Scenario& s, RunOutput& out) {
  const ChannelAnalysis channel = analyse_channel(s);
  fill_channel(out.report, channel);
  const DetectorMap map = detector_map(channel.contributions, s.detector_half_extent_um());
  const double gap = cluster_gap_um(s);
  out.report.details["max_power_coordinate_um"] = map.max_power_coordinate_um();
  out.report.details["cluster_gap_um"] = gap;
  out.report.details["cluster_count"] = map.cluster_count(gap);

  csv::Table samples({"coordinate_um", "power_norm", "delay_s", "ray_index"});
  for (const DetectorSample& d : map.samples) {
    samples.add({d.coordinate_um, d.power_norm, d.delay_s, static_cast<long long>(d.ray_index)});
  }

  // Received power per fixed-width strip of the detector.
  const double half = s.detector_half_extent_um();
  const auto n_bins = static_cast<std::size_t>(std::ceil(2.0 * half / kProfileBinUm));
  std::vector<double> power(n_bins, 0.0);
  const auto k = static_cast<double>(channel.contributions.bundle_size);
  for (const PathContribution& c : channel.contributions.detected) {
    auto b = static_cast<std::size_t>(std::floor((c.detector_coordinate_um + half) / kProfileBinUm));
    power[std::min(b, n_bins - 1)] += c.gain / k;
  }
  const double strongest = *std::max_element(power.begin(), power.end());
  csv::Table profile({"bin_center_um", "power", "power_norm"});
  for (std::size_t b = 0; b < n_bins; ++b) {
    profile.add({-half + (static_cast<double>(b) + 0.5) * kProfileBinUm, power[b],
                 strongest > 0.0 ? power[b] / strongest : 0.0});
  }
  add_file(out, "detector.csv", samples.str());
  add_file(out, "detector_profile.csv", profile.str());
}

void run_sweep(const Scenario& s, RunOutput& out) {
  if (!s.sweep) throw ScenarioError(std::vector<Violation>{{"sweep", "the sweep command needs a sweep block"}});
  csv::Table table({"index", "value", "dominant_delay_s", "received_fraction", "path_loss_db",
                    "arrived", "leaked", "deviated"});
  json points = json::array();
  for (std::size_t i = 0; i < s.sweep->values.size(); ++i) {
    const Scenario point = sweep_point(s, i);
    const ChannelAnalysis channel = analyse_channel(point);
    const double loss = total_path_loss_db(point.array_layout(), point.media, point.wavelength());
    const double delay = channel.cir.dominant_time_s();
    const double fraction = channel.contributions.received_fraction();
    table.add({static_cast<long long>(i), s.sweep->values[i], delay, fraction, loss,
               static_cast<long long>(channel.trace.count(PathStatus::arrived)),
               static_cast<long long>(channel.trace.count(PathStatus::leaked)),
               static_cast<long long>(channel.trace.count(PathStatus::deviated))});
    char name[32];
    std::snprintf(name, sizeof name, "cir_%03zu.csv", i + 1);
    add_file(out, name, cir_csv(channel.cir));
    points.push_back({{"value", s.sweep->values[i]}, {"dominant_delay_s", delay}});
  }
  out.report.details["parameter"] = s.sweep->parameter;
  out.report.details["points"] = points;
  add_file(out, "sweep.csv", table.str());
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::trace: return "trace";
    case Command::pathloss: return "pathloss";
    case Command::cir: return "cir";
    case Command::pulse: return "pulse";
    case Command::detector: return "detector";
    case Command::sweep: return "sweep";
    case Command::validate: return "validate";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::trace, Command::pathloss, Command::cir, Command::pulse,
                    Command::detector, Command::sweep, Command::validate}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

ChannelAnalysis analyse_channel(const Scenario& s) {
  ChannelAnalysis out;
  const ArrayLayout layout = s.array_layout();
  const auto bundle = collimated_bundle(layout.shape, static_cast<std::size_t>(s.rays));
  out.trace = trace_array(layout, s.media, bundle);
  out.contributions =
      collect_contributions(out.trace, s.media, s.wavelength(), s.detector_half_extent_um());
  if (s.gamma_mode == GammaMode::aggregate) out.gamma = cumulative_focusing_gain(out.trace.focus);
  out.cir = deposit(out.contributions, s.channel_options().dt_s, out.gamma);
  return out;
}

PulseAnalysis analyse_pulse(const Scenario& s, const ChannelAnalysis& channel) {
  PulseAnalysis out;
  out.tx = trim_zeros(gaussian_pulse(s.pulse.e0, s.pulse.tau_fs * 1e-15, s.wavelength(),
                                     s.pulse.dt_fs * 1e-15, s.pulse.span_fs * 1e-15));
  out.rx = trim_zeros(propagate(out.tx, channel.cir));
  const std::size_t n = next_pow2(std::max(out.tx.samples.size(), out.rx.samples.size()));
  out.tx_spectrum = spectrum(out.tx, n);
  out.rx_spectrum = spectrum(out.rx, n);
  out.estimate = estimate_channel(out.tx, out.rx, s.deconvolution);
  out.attenuation = 1.0 - channel.gamma * channel.contributions.received_fraction();
  double peak = 0.0;
  for (double x : out.rx.samples) peak = std::max(peak, std::abs(x));
  out.power_fraction = peak / s.pulse.e0;
  return out;
}

double cluster_gap_um(const Scenario& s) {
  return 10.0 * s.cell_shape().height_um() / static_cast<double>(s.rays);
}

json RunReport::to_json() const {
  json v = json::array();
  for (const Violation& x : violations) v.push_back({{"field", x.field}, {"message", x.message}});
  return {{"command", std::string(neuroray::to_string(command))},
          {"scenario", scenario},
          {"path_loss_db", optional_json(path_loss_db)},
          {"traced_path_loss_db", optional_json(traced_path_loss_db)},
          {"dominant_delay_s", optional_json(dominant_delay_s)},
          {"received_fraction", optional_json(received_fraction)},
          {"counts",
           {{"arrived", arrived},
            {"leaked", leaked},
            {"deviated", deviated},
            {"outside_detector", outside_detector}}},
          {"bundle_exit_cells", bundle_exit_cells ? json(*bundle_exit_cells) : json(nullptr)},
          {"details", details},
          {"violations", v},
          {"files", files}};
}

RunOutput run(Command command, const Scenario& scenario) {
  RunOutput out;
  out.report.command = command;
  out.report.scenario = neuroray::to_json(scenario);
  switch (command) {
    case Command::trace: run_trace(scenario, out); break;
    case Command::pathloss: run_pathloss(scenario, out); break;
    case Command::cir: run_cir(scenario, out); break;
    case Command::pulse: run_pulse(scenario, out); break;
    case Command::detector: run_detector(scenario, out); break;
    case Command::sweep: run_sweep(scenario, out); break;
    case Command::validate: out.report.violations = validate(scenario); break;
  }
  return out;
}

void write_outputs(const RunOutput& output, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const std::filesystem::path path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw IoError("cannot write " + path.string());
  };
  for (const OutputFile& file : output.files) write(file.name, file.content);
  write("report.json", output.report.to_json().dump(2) + "\n");
}

}  // namespace neuroray
