#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhrm/experiments.hpp"

using namespace nhrm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nhrm_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_pump_config() {
  return json{{"experiment", "pump"},
              {"model", {{"lambda", 1.5}, {"delta", 0.5}, {"V", 1.0}, {"N", 6}}},
              {"kappa", 0.05},
              {"ramp", "V"},
              {"ramp_from", 1.0},
              {"omegas", {2e-3}},
              {"n_steps", 2000}};
}

}  // namespace

TEST_CASE("config validation rejects bad fields with diagnostics") {
  CHECK_THROWS_AS((void)validate_config(json::array()), ConfigError);
  CHECK_THROWS_AS((void)validate_config({{"experiment", "nope"},
                                         {"model", {{"lambda", 1.0}, {"N", 4}}}}),
                  ConfigError);
  // missing model
  CHECK_THROWS_AS((void)validate_config({{"experiment", "zak"}}), ConfigError);
  // bad lambda
  CHECK_THROWS_WITH_AS(
      (void)validate_config({{"experiment", "zak"},
                             {"model", {{"lambda", -1.0}, {"N", 4}}}}),
      doctest::Contains("lambda"), ConfigError);
  // empty path
  CHECK_THROWS_WITH_AS(
      (void)validate_config({{"experiment", "spectrum_scan"},
                             {"model", {{"lambda", 1.0}, {"N", 4}}},
                             {"path", json::array()}}),
      doctest::Contains("path"), ConfigError);
  // degenerate loop radius
  CHECK_THROWS_AS(
      (void)validate_config(
          {{"experiment", "chern"},
           {"model", {{"lambda", 1.0}, {"N", 4}}},
           {"loop",
            {{"kind", "circle"}, {"center", {0.0, 0.0}}, {"radius", 0.0}}}}),
      ConfigError);
  // empty omega list
  CHECK_THROWS_WITH_AS(
      (void)validate_config({{"experiment", "pump"},
                             {"model", {{"lambda", 1.0}, {"N", 4}}},
                             {"omegas", json::array()}}),
      doctest::Contains("omegas"), ConfigError);
}

TEST_CASE("csv round trip preserves values exactly") {
  const fs::path dir = temp_dir("csv");
  fs::create_directories(dir);
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{1.0 / 3.0, -2.7182818284590452},
            {1e-17, 12345.678901234567},
            {0.0, -0.0}};
  write_csv(dir / "t.csv", t);
  const CsvTable u = read_csv(dir / "t.csv");
  REQUIRE(u.header == t.header);
  REQUIRE(u.rows.size() == t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    for (size_t j = 0; j < t.rows[i].size(); ++j)
      CHECK(u.rows[i][j] == t.rows[i][j]);  // 17 significant digits round-trip
}

TEST_CASE("chern runner reproduces the loop catalogue") {
  const json base = {{"experiment", "chern"},
                     {"model", {{"lambda", 1.5}, {"N", 10}}},
                     {"band", "upper"},
                     {"nk", 96},
                     {"nq", 96}};
  auto with_loop = [&](json loop) {
    json c = base;
    c["loop"] = std::move(loop);
    return c;
  };
  const json enclosing = with_loop(
      {{"kind", "circle"}, {"center", {0.0, 0.0}}, {"radius", 0.5}});
  const json summary = run_chern(enclosing, temp_dir("chern1"));
  CHECK(summary.at("plaquette") == 1);
  CHECK(std::abs(summary.at("line_integral").get<double>() - 1.0) < 1e-3);
  CHECK(summary.at("agree") == true);

  const json outside = with_loop(
      {{"kind", "circle"}, {"center", {1.0, 0.0}}, {"radius", 0.5}});
  CHECK(run_chern(outside, temp_dir("chern2")).at("plaquette") == 0);

  const json reversed = with_loop({{"kind", "circle"},
                                   {"center", {0.0, 0.0}},
                                   {"radius", 0.5},
                                   {"orientation", -1}});
  CHECK(run_chern(reversed, temp_dir("chern3")).at("plaquette") == -1);

  // rectangle spanning all four quadrants, counterclockwise
  const json rect = with_loop(
      {{"kind", "polyline"},
       {"vertices", {{0.7, -0.4}, {0.7, 0.5}, {-0.6, 0.5}, {-0.6, -0.4}}}});
  CHECK(run_chern(rect, temp_dir("chern4")).at("plaquette") == 1);

  // loop through the degeneracy surfaces the minimum distance
  const json through = with_loop(
      {{"kind", "circle"}, {"center", {0.25, 0.0}}, {"radius", 0.25}});
  CHECK_THROWS_WITH_AS((void)run_chern(through, temp_dir("chern5")),
                       doctest::Contains("min distance"),
                       LoopThroughDegeneracy);
}

TEST_CASE("zak and edge profile runners") {
  const json zc = {{"experiment", "zak"},
                   {"model",
                    {{"lambda", 1.5}, {"delta", 0.5}, {"V", 0.0}, {"N", 10}}},
                   {"band", "lower"},
                   {"nk", 2048}};
  const json zs = run_zak(zc, temp_dir("zak"));
  CHECK(std::abs(zs.at("zak_phase_mod_1").get<double>() - 0.5) < 1e-9);

  const json ec = {{"experiment", "edge_profile"},
                   {"model",
                    {{"lambda", 1.5}, {"delta", 0.5}, {"V", 0.3}, {"N", 20}}}};
  const fs::path dir = temp_dir("edge");
  const json es = run_edge_profile(ec, dir);
  CHECK(es.at("max_deviation_L").get<double>() < 1e-8);
  CHECK(es.at("max_deviation_R").get<double>() < 1e-8);
  const CsvTable t = read_csv(dir / "edge_profile.csv");
  CHECK(t.rows.size() == 40);
}

TEST_CASE("spectrum scan: lambda invariance is byte-identical") {
  json cfg = {{"experiment", "spectrum_scan"},
              {"model", {{"lambda", 1.5}, {"N", 10}}},
              {"path", {{0.9, 0.0}, {0.0, 0.9}, {-0.9, 0.0}, {0.0, 0.0}}},
              {"samples_per_edge", 6},
              {"boundaries", {"ring", "open"}}};
  const fs::path d1 = temp_dir("scan_l15");
  run_spectrum_scan(cfg, d1);
  cfg["model"]["lambda"] = 1.0;
  const fs::path d2 = temp_dir("scan_l10");
  run_spectrum_scan(cfg, d2);
  for (const char* f : {"spectrum_ring.csv", "spectrum_open.csv"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));
}

TEST_CASE("spectrum scan passes through the gap closing without aborting") {
  const json cfg = {{"experiment", "spectrum_scan"},
                    {"model", {{"lambda", 1.5}, {"N", 6}}},
                    {"path", {{-0.5, 0.0}, {0.5, 0.0}}},
                    {"closed", false},
                    {"samples_per_edge", 11},  // hits (0, 0) exactly
                    {"boundaries", {"ring"}}};
  const fs::path dir = temp_dir("scan_gap");
  const json s = run_spectrum_scan(cfg, dir);
  CHECK(s.at("n_samples").get<int>() == 12);
}

TEST_CASE("weak-link scan shows the avoided crossing") {
  const json cfg = {{"experiment", "spectrum_scan"},
                    {"model", {{"lambda", 1.5}, {"delta", 0.5}, {"N", 50}}},
                    {"path", {{0.5, -1.0}, {0.5, 1.0}}},
                    {"closed", false},
                    {"samples_per_edge", 41},
                    {"boundaries", {"weak_link"}},
                    {"kappa", 0.05}};
  const fs::path dir = temp_dir("scan_weak");
  run_spectrum_scan(cfg, dir);
  const CsvTable t = read_csv(dir / "spectrum_weak_link.csv");
  // mid-gap branches are columns 4 + N and 4 + N + 1 (0-based); find the
  // minimum splitting along the scan and check it stays open
  double min_gap = 1e9;
  size_t argmin = 0;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const double gap = t.rows[i][4 + 50] - t.rows[i][4 + 49];
    if (gap < min_gap) {
      min_gap = gap;
      argmin = i;
    }
  }
  CHECK(min_gap > 1e-4);
  // narrowest point sits at V = 0 (middle of the scan)
  CHECK(std::abs(t.rows[argmin][3]) < 0.06);
}

TEST_CASE("pump runner emits traces and summary") {
  const fs::path dir = temp_dir("pump");
  const json s = run_pump(small_pump_config(), dir);
  REQUIRE(s.at("runs").size() == 1);
  const auto& r = s.at("runs").at(0);
  CHECK(r.at("max_norm_drift").get<double>() < 1e-8);
  CHECK(std::abs(r.at("final_site_charge_sum").get<double>()) < 1e-9);
  const CsvTable t = read_csv(dir / "pump_omega_0.csv");
  CHECK(t.header == std::vector<std::string>{"t", "V_t", "j_end", "q_end", "f",
                                             "norm_drift"});
  CHECK(t.rows.size() == 2001);
  // the charge column ends at the summary value
  CHECK(t.rows.back()[3] == r.at("final_charge").get<double>());
}

TEST_CASE("identical config produces bit-identical outputs") {
  const fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2"),
                 d4 = temp_dir("det4");
  const json cfg = small_pump_config();
  run_pump(cfg, d1, 1);
  run_pump(cfg, d2, 1);
  run_pump(cfg, d4, 4);  // thread fan-out must not change any byte
  for (const char* f :
       {"config.echo", "summary.json", "pump_omega_0.csv", "plot.gp"}) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(slurp(d1 / f) == slurp(d4 / f));
  }
}

TEST_CASE("config echo round-trips to the validated config") {
  const fs::path dir = temp_dir("echo");
  const json cfg = small_pump_config();
  run_pump(cfg, dir);
  const json echoed = json::parse(slurp(dir / "config.echo"));
  CHECK(echoed == validate_config(cfg));
  // summary re-parses as json
  CHECK(json::accept(slurp(dir / "summary.json")));
}

TEST_CASE("cli process: exit codes and outputs") {
  const fs::path dir = temp_dir("cli");
  fs::create_directories(dir);
  const std::string cli = NHRM_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };

  // success on a shipped config
  const std::string cfgdir = NHRM_CONFIG_DIR;
  CHECK(run("zak --config " + cfgdir + "/zak.json --out " +
            (dir / "zak").string()) == 0);
  CHECK(fs::exists(dir / "zak" / "summary.json"));

  // config error: empty path
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"experiment":"spectrum_scan","model":{"lambda":1.0,"N":4},)"
        << R"("path":[]})";
  }
  CHECK(run("spectrum_scan --config " + (dir / "bad.json").string()) == 2);

  // numerical guard: loop through the degeneracy
  {
    std::ofstream g(dir / "guard.json");
    g << R"({"experiment":"chern","model":{"lambda":1.0,"N":4},)"
      << R"("loop":{"kind":"circle","center":[0.25,0.0],"radius":0.25},)"
      << R"("nk":32,"nq":32})";
  }
  CHECK(run("chern --config " + (dir / "guard.json").string() + " --out " +
            (dir / "chern_guard").string()) == 3);
  // a tripped guard leaves no partial output
  CHECK(!fs::exists(dir / "chern_guard" / "summary.json"));

  // unreadable config
  CHECK(run("zak --config " + (dir / "missing.json").string()) == 2);

  // mismatched subcommand vs config experiment
  CHECK(run("pump --config " + cfgdir + "/zak.json") == 2);
}
