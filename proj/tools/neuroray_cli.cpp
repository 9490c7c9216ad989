// Command-line front end: runs one analysis on a scenario file.
//
// Exit codes: 0 success, 1 usage or I/O failure, 2 invalid scenario,
// 3 physics error (e.g. nothing reaches the detector). Failures print a
// single JSON error record on stderr.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neuroray/runner.hpp"

namespace {

using nlohmann::json;

int fail(int code, const std::string& kind, const std::string& message,
         const std::vector<neuroray::Violation>& violations = {}) {
  json record{{"error", kind}, {"message", message}};
  if (!violations.empty()) {
    json list = json::array();
    for (const auto& v : violations) list.push_back({{"field", v.field}, {"message", v.message}});
    record["violations"] = list;
  }
  std::cerr << record.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ray-optics channel simulator for arrays of neuron-shaped cells"};
  std::string scenario_path;
  std::string out_dir;
  std::string command_name = "cir";
  std::vector<std::string> overrides;
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--out", out_dir, "Output directory (default: the scenario's output_dir)");
  app.add_option("--command", command_name,
                 "trace, pathloss, cir, pulse, detector, sweep or validate")
      ->capture_default_str();
  app.add_option("--set", overrides, "Override a scenario value, e.g. layout.n_cells=4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "usage", e.what());
  }

  const auto command = neuroray::parse_command(command_name);
  if (!command) return fail(1, "usage", "unknown command '" + command_name + "'");

  try {
    json doc = neuroray::read_scenario_json(scenario_path);
    for (const std::string& o : overrides) neuroray::apply_override(doc, o);
    const neuroray::Scenario scenario = neuroray::scenario_from_json(doc);

    if (*command == neuroray::Command::validate) {
      std::cout << json{{"violations", json::array()}}.dump() << '\n';
      return 0;
    }

    const neuroray::RunOutput output = neuroray::run(*command, scenario);
    neuroray::write_outputs(output, out_dir.empty() ? scenario.output_dir : out_dir);
    std::cout << output.report.to_json().dump(2) << '\n';
    return 0;
  } catch (const neuroray::ScenarioError& e) {
    return fail(2, "validation", e.what(), e.violations());
  } catch (const neuroray::IoError& e) {
    return fail(1, "io", e.what());
  } catch (const neuroray::PhysicsError& e) {
    return fail(3, "physics", e.what());
  } catch (const neuroray::InvalidArgument& e) {
    return fail(2, "validation", e.what());
  } catch (const neuroray::Error& e) {
    return fail(3, "physics", e.what());
  }
}
