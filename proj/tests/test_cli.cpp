#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("neuroray_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path scenario(const std::string& name) { return fs::path(NEURORAY_SCENARIO_DIR) / (name + ".json"); }

Result run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "neuroray_cli_stdout.txt";
  const fs::path err = fs::temp_directory_path() / "neuroray_cli_stderr.txt";
  const std::string cmd = std::string("\"") + NEURORAY_CLI_PATH + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("cir run writes header-led CSV and a report") {
  const fs::path dir = scratch("cir");
  const Result r = run("--scenario " + scenario("fusiform").string() + " --out " + dir.string() +
                       " --command cir");
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir / "cir.csv");
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == std::vector<std::string>{"time_s", "amplitude"});
  CHECK(read_csv(dir / "pdp.csv")[0] == std::vector<std::string>{"time_s", "power"});
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["command"] == "cir");
  CHECK(report["dominant_delay_s"].get<double>() > 2e-12);
  CHECK(report["scenario"]["shape"]["kind"] == "fusiform");
  CHECK(report["files"].size() == 3);
  CHECK(json::parse(r.out) == report);
}

TEST_CASE("identical runs give byte-identical files") {
  for (const char* command : {"trace", "cir", "pulse", "detector"}) {
    const fs::path a = scratch(std::string("repeat_a_") + command);
    const fs::path b = scratch(std::string("repeat_b_") + command);
    const std::string base = "--scenario " + scenario("pyramidal").string() + " --command " + command;
    REQUIRE(run(base + " --out " + a.string()).code == 0);
    REQUIRE(run(base + " --out " + b.string()).code == 0);
    for (const auto& entry : fs::directory_iterator(a)) {
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
  }
}

TEST_CASE("free-space cir is one spike") {
  const fs::path dir = scratch("free");
  const Result r = run("--scenario " + scenario("spherical").string() + " --out " + dir.string() +
                       " --command cir --set layout.n_cells=0");
  REQUIRE(r.code == 0);
  int nonzero = 0;
  const auto rows = read_csv(dir / "cir.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) nonzero += std::stod(rows[i][1]) != 0.0;
  CHECK(nonzero == 1);
}

TEST_CASE("every command runs on every bundled shape") {
  for (const char* shape : {"fusiform", "spherical", "pyramidal"}) {
    for (const char* command : {"trace", "pathloss", "cir", "pulse", "detector"}) {
      const fs::path dir = scratch(std::string("all_") + shape + command);
      const Result r = run("--scenario " + scenario(shape).string() + " --out " + dir.string() +
                           " --command " + command);
      CHECK_MESSAGE(r.code == 0, shape, " ", command, ": ", r.err);
      CHECK(fs::exists(dir / "report.json"));
    }
  }
}

TEST_CASE("pathloss curve has one row per cell count") {
  const fs::path dir = scratch("pathloss");
  REQUIRE(run("--scenario " + scenario("fusiform").string() + " --out " + dir.string() +
              " --command pathloss").code == 0);
  const auto rows = read_csv(dir / "pathloss.csv");
  REQUIRE(rows.size() == 20);
  CHECK(rows[0][0] == "n_cells");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]));
    CHECK(std::stod(rows[i][5]) > std::stod(rows[i - 1][5]));
  }
  CHECK(std::stod(rows.back()[1]) == doctest::Approx(450.0));
}

TEST_CASE("sweep over cell count") {
  const fs::path dir = scratch("sweep");
  const Result r = run("--scenario " + scenario("fusiform_sweep").string() + " --out " +
                       dir.string() + " --command sweep");
  REQUIRE(r.code == 0);
  int cir_files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    cir_files += entry.path().filename().string().rfind("cir_", 0) == 0;
  }
  CHECK(cir_files == 18);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 19);
  CHECK(rows[0][2] == "dominant_delay_s");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][2]) > std::stod(rows[i - 1][2]));
  }
}

TEST_CASE("a failing sweep writes nothing") {
  const fs::path dir = scratch("sweep_fail");
  const Result r = run("--scenario " + scenario("fusiform").string() + " --out " + dir.string() +
                       " --command sweep --set sweep.parameter=layout.n_cells" +
                       " --set 'sweep.values=[1,2,40]'");
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir));
  const json err = json::parse(r.err);
  CHECK(err["error"] == "validation");
  CHECK(err["violations"][0]["field"] == "sweep.values[2]");
}

TEST_CASE("validation errors exit 2 with a machine-readable record") {
  const Result ok = run("--scenario " + scenario("spherical").string() + " --command validate");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["violations"].empty());

  const Result bad = run("--scenario " + scenario("spherical").string() +
                         " --command validate --set layout.d_l_um=-1");
  CHECK(bad.code == 2);
  const json err = json::parse(bad.err);
  REQUIRE(err["violations"].size() == 1);
  CHECK(err["violations"][0]["field"] == "layout.d_l_um");

  const fs::path dir = scratch("invalid_run");
  CHECK(run("--scenario " + scenario("fusiform").string() + " --out " + dir.string() +
            " --command cir --set shape.w_c_um=50").code == 2);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("physics errors exit 3") {
  const fs::path dir = scratch("empty");
  const Result r = run("--scenario " + scenario("fusiform").string() + " --out " + dir.string() +
                       " --command cir --set rays=2 --set detector_extent_um=0.001");
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["error"] == "physics");
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("usage and file errors exit 1") {
  CHECK(run("--scenario /nonexistent.json --command cir").code == 1);
  CHECK(run("--scenario " + scenario("fusiform").string() + " --command fly").code == 1);
  CHECK(run("--command cir").code == 1);
}
