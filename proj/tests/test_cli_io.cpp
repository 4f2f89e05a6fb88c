#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stickygraph/cli_io.hpp"

using namespace stickygraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stickygraph_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "stickygraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return main_dispatch(int(argv.size()), argv.data());
}

const char* kFull = R"({
  "s": 0.25, "alpha": 0.5,
  "grid": {"n": 65, "ratio": 0.85},
  "quad": {"r_pair": 0.2, "R_tail": 6, "n_near": 12, "n_mid": 8},
  "exterior": {
    "v": [{"kind": "spline_bump", "lo": 1.5, "hi": 2.5, "height": 1},
          {"kind": "linear", "slope": 0.1, "offset": -0.2}],
    "phi": {"kind": "compact_bump", "center": 2.5, "radius": 0.4, "height": 3},
    "d": 0.6
  },
  "t_values": [0, 0.125, 0.001],
  "out_dir": "somewhere", "seed": 7
})";

}  // namespace

TEST_CASE("config: minimal document takes defaults") {
  const RunConfig rc = parse_config(R"({"s": 0.5})");
  CHECK(rc.experiment.params.s == 0.5);
  CHECK(rc.experiment.grid.n == 129);
  CHECK(rc.experiment.t_values == std::vector<double>{0.0});
  CHECK_FALSE(rc.tuning.has_value());
}

TEST_CASE("config: t_values must ascend") {
  try {
    parse_config(kFull);
    FAIL("accepted descending t_values");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "t_values");
  }
  std::string fixed = kFull;
  fixed.replace(fixed.find("0.001"), 5, "0.5");
  const RunConfig rc = parse_config(fixed);
  CHECK(rc.experiment.t_values.size() == 3);
  CHECK(rc.experiment.v.terms().size() == 2);
  CHECK(rc.experiment.phi.terms().size() == 1);
  CHECK(rc.experiment.seed == 7);
}

TEST_CASE("config: serialize and parse round trip is exact") {
  std::string text = kFull;
  text.replace(text.find("0.001"), 5, "0.30000000000000004");
  RunConfig rc = parse_config(text);
  FlatWallTuning tu;
  tu.probe = Shape::spline_bump(2.5, 3.5, -1.0);
  tu.a0 = 5.0 / 3.0;
  rc.tuning = tu;
  rc.linearization.eps = {0.3, 0.1 / 3};
  const std::string once = serialize_config(rc);
  const RunConfig back = parse_config(once);
  CHECK(serialize_config(back) == once);
  CHECK(back.experiment.t_values.back() == 0.30000000000000004);
  CHECK(back.tuning->a0 == 5.0 / 3.0);
  CHECK(back.experiment.phi.value(2.6) == rc.experiment.phi.value(2.6));
  CHECK(back.experiment.v.value(2.1) == rc.experiment.v.value(2.1));
  CHECK(back.linearization.eps[1] == 0.1 / 3);
}

TEST_CASE("config: invalid corpus reports the offending key") {
  const fs::path dir = fs::path(STICKYGRAPH_TEST_DATA) / "invalid";
  std::ifstream list(dir / "expected.txt");
  std::string file, key;
  int n = 0;
  while (list >> file >> key) {
    CAPTURE(file);
    ++n;
    try {
      load_config(dir / file);
      FAIL("accepted " << file);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
    }
  }
  CHECK(n >= 50);
}

TEST_CASE("format_double keeps 17 digits and a float marker") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(3) == "3.0");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("csv text uses LF and full precision") {
  const CsvTable t{"x", {"a", "b"}, {{1.0 / 3, 2}, {std::nan(""), -1e-300}}};
  const std::string s = csv_text(t);
  CHECK(s.find('\r') == std::string::npos);
  CHECK(s == "a,b\n0.33333333333333331,2.0\nnan,-1e-300\n");
}

TEST_CASE("checksum is CRC-32") {
  const fs::path d = scratch("crc");
  fs::create_directories(d);
  std::ofstream(d / "f.txt", std::ios::binary) << "123456789";
  CHECK(file_checksum(d / "f.txt") == "cbf43926");
}

TEST_CASE("report round trip and manifest") {
  LinearizationReport r;
  r.slope = 1;
  r.sigma = 0.75;
  r.rows = {{0.2, 7.75e-4, 1e-9, 3}, {0.1, 3.71e-4, 2e-9, 2}};
  r.decreasing = true;
  const fs::path d = scratch("report");
  const auto files = write_report(to_doc(r), d);
  REQUIRE(files.back().filename() == "manifest.json");
  const auto body = nlohmann::json::parse(slurp(d / "linearization.json"));
  CHECK(body["rows"][1]["sup_distance"].get<double>() == 3.71e-4);
  CHECK(body["decreasing"].get<bool>());
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  for (const auto& f : m["files"]) CHECK(file_checksum(d / f["path"].get<std::string>()) == f["crc32"].get<std::string>());
  CHECK(fs::exists(d / "linearization.svg"));
  CHECK_THROWS_AS(write_report(to_doc(r), d), IoError);
  WriteOptions force;
  force.force = true;
  CHECK_NOTHROW(write_report(to_doc(r), d, force));
}

TEST_CASE("manifest notes a report with nothing to plot") {
  const fs::path d = scratch("noplot");
  write_report(to_doc(LinearizationReport{}), d);
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["notes"][0] == "no plottable series");
  CHECK(emit_plot_data(to_doc(LinearizationReport{}), d).empty());
}

TEST_CASE("svg is well formed enough") {
  Plot p{"p", "t", true, true, {{"a", {1e-3, 1e-2, 1e-1}, {1e-6, 1e-4, 1e-2}}}, "slope 2"};
  const std::string svg = render_svg(p);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"solve"}) == 2);
  CHECK(run({"solve", "-c", "/nonexistent/config.json"}) == 2);
  const fs::path d = scratch("exit");
  fs::create_directories(d);
  std::ofstream(d / "bad.json") << R"({"s": 0.5, "grid": {"n": 3}})";
  CHECK(run({"solve", "-c", (d / "bad.json").string()}) == 2);
  std::ofstream(d / "ok.json") << R"({"s": 0.5, "grid": {"n": 17, "ratio": 0.8}})";
  CHECK(run({"solve", "-c", (d / "ok.json").string(), "-o", (d / "out").string()}) == 0);
  CHECK(fs::exists(d / "out" / "manifest.json"));
  CHECK(run({"solve", "-c", (d / "ok.json").string(), "-o", (d / "out").string()}) == 2);
  CHECK(run({"solve", "-c", (d / "ok.json").string(), "-o", (d / "out").string(), "--force"}) == 0);
  // The barrier defaults do not reach the sign change within the probe range.
  CHECK(run({"barrier", "-o", (d / "bar").string()}) == 1);
  CHECK(run({"selftest"}) == 0);
}

TEST_CASE("output directory: env var, then flag") {
  const fs::path d = scratch("env");
  fs::create_directories(d);
  std::ofstream(d / "ok.json") << R"({"s": 0.5, "grid": {"n": 17, "ratio": 0.8}, "out_dir": ")" +
                                      (d / "cfg").string() + "\"}";
  setenv("STICKYGRAPH_OUT", (d / "env").c_str(), 1);
  CHECK(run({"solve", "-c", (d / "ok.json").string()}) == 0);
  CHECK(fs::exists(d / "env" / "manifest.json"));
  CHECK(run({"solve", "-c", (d / "ok.json").string(), "-o", (d / "flag").string()}) == 0);
  CHECK(fs::exists(d / "flag" / "manifest.json"));
  unsetenv("STICKYGRAPH_OUT");
  CHECK(run({"solve", "-c", (d / "ok.json").string()}) == 0);
  CHECK(fs::exists(d / "cfg" / "manifest.json"));
}

TEST_CASE("shipped configs parse and round trip") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(STICKYGRAPH_CONFIGS)) {
    CAPTURE(e.path().string());
    const RunConfig rc = load_config(e.path());
    CHECK(serialize_config(parse_config(serialize_config(rc))) == serialize_config(rc));
    ++n;
  }
  CHECK(n >= 5);
}
