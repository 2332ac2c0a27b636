#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "colphys/config.hpp"
#include "colphys/report.hpp"

using namespace colphys;
using nlohmann::json;

namespace {

std::string failing_field(const json& j) {
  try {
    parse_run_config(j);
  } catch (const InvalidConfig& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("an empty config takes every default") {
  const auto c = parse_run_config(json::object());
  CHECK(c.sim.grid.nx == 32);
  CHECK(c.sim.mode == MoistureMode::Warm);
  CHECK(c.sim.policy.kind == SchedulePolicy{}.kind);
  CHECK(c.device.name == "P100");
  CHECK_FALSE(c.calibration_path.has_value());
}

TEST_CASE("bad configs name the offending key") {
  CHECK(failing_field({{"gird", 1}}) == "gird");
  CHECK(failing_field({{"grid", {{"nx", 4}, {"nq", 3}}}}) == "grid.nq");
  CHECK(failing_field({{"grid", {{"nx", 0}}}}) == "grid.nx");
  CHECK(failing_field({{"mode", "tepid"}}) == "mode");
  CHECK(failing_field({{"policy", {{"kind", "fancy"}}}}) == "policy.kind");
  CHECK(failing_field({{"workers", "eight"}}) == "workers");
  CHECK(failing_field({{"scenario", {{"cloudy_fraction", 1.5}}}}) == "scenario.cloudy_fraction");
  CHECK(failing_field({{"dt", -1.0}}) == "dt");
  CHECK(failing_field({{"components", json::array({{{"index", 0}, {"kind", "dynamics"}}})}}).rfind("components", 0) == 0);
}

TEST_CASE("config round trip") {
  json j = {{"grid", {{"nx", 7}, {"ny", 5}, {"nz", 33}, {"dz", 120.0}}},
            {"mode", "cold"},
            {"scenario", {{"cloudy_fraction", 0.4}, {"layout", "deck"}}},
            {"seed", 7},
            {"workers", 3},
            {"policy", {{"kind", "dynamic"}, {"chunk", 4}, {"min_chunk", 1}}},
            {"execution_mode", "hybrid-sim"},
            {"components", json::array({{{"index", 0}, {"kind", "microphysics"}},
                                        {{"index", 1}, {"kind", "stub"}, {"stub_cost", 1e-6}}})},
            {"device", "k20x"}};
  const auto a = parse_run_config(j);
  CHECK(a.sim.grid.nz == 33);
  CHECK(a.sim.mode == MoistureMode::Cold);
  CHECK(a.sim.policy.kind == ScheduleKind::Dynamic);
  CHECK(a.device.sm_count == 14);
  REQUIRE(a.sim.plan.components.size() == 2);
  CHECK(a.sim.plan.components[1].kind == ComponentKind::SyntheticStub);

  const json once = to_json(a);
  const json twice = to_json(parse_run_config(once));
  CHECK(once == twice);
}

TEST_CASE("shipped configs load") {
  for (const auto& entry : std::filesystem::directory_iterator(COLPHYS_DATA_DIR "/configs")) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_run_config(entry.path().string()));
  }
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), InvalidConfig);
}

TEST_CASE("device presets and files agree") {
  for (const char* name : {"k20x", "p100"}) {
    const auto preset = load_device(name);
    const auto file = load_device(std::string(COLPHYS_DATA_DIR "/devices/") + name + ".json");
    CHECK(to_json(preset) == to_json(file));
  }
  CHECK_THROWS_AS(load_device("gtx"), InvalidConfig);
}

TEST_CASE("calibration input") {
  const auto csv = load_calibration(COLPHYS_DATA_DIR "/calibration/p100_phase_times.csv");
  const auto ref = reference_phase_table();
  REQUIRE(csv.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(csv[i].columns == ref[i].columns);
    CHECK(csv[i].config == ref[i].config);
    CHECK(csv[i].t_in == doctest::Approx(ref[i].t_in));
    CHECK(csv[i].t_kernel == doctest::Approx(ref[i].t_kernel));
    CHECK(csv[i].t_out == doctest::Approx(ref[i].t_out));
  }

  std::istringstream no_header("2000,warm,1,2,3\n");
  CHECK_THROWS_AS(read_calibration_csv(no_header), InvalidConfig);
  std::istringstream bad_mode("columns,config,t_in_ms,t_kernel_ms,t_out_ms\n2000,tepid,1,2,3\n");
  CHECK_THROWS_AS(read_calibration_csv(bad_mode), InvalidConfig);
  std::istringstream short_row("columns,config,t_in_ms,t_kernel_ms,t_out_ms\n2000,warm,1,2\n");
  CHECK_THROWS_AS(read_calibration_csv(short_row), InvalidConfig);
  std::istringstream ok("columns,config,t_in_ms,t_kernel_ms,t_out_ms\n2000,warm,1.5,29,0.8\n");
  const auto rows = read_calibration_csv(ok);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].t_kernel == doctest::Approx(29e-3));

  const json j = {{"rows", json::array({{{"columns", 10}, {"config", "cold"}, {"t_in_ms", 1.0},
                                         {"t_kernel_ms", 2.0}, {"t_out_ms", 3.0}}})}};
  const auto from_json = parse_calibration(j);
  REQUIRE(from_json.size() == 1);
  CHECK(from_json[0].t_out == doctest::Approx(3e-3));
}

TEST_CASE("search space parsing") {
  const auto s = parse_space({{"gangs", {10, 20}}, {"vector_lengths", {32}}, {"regs", {64, 128}}});
  CHECK(s.size() == 4);
  CHECK_THROWS_AS(parse_space({{"gangs", json::array()}, {"vector_lengths", {32}}, {"regs", {64}}}), InvalidConfig);
}

TEST_CASE("format_number round-trips") {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(20000.0) == "20000");
}

TEST_CASE("report table CSV and JSON") {
  ReportTable t;
  t.experiment = "run";
  t.columns = {"columns", "policy", "time_s", "checksum", "ok"};
  t.add_row({"20000", "guided", "0.25", "12.5", "true"});
  t.add_row({"10", "a,b", "1e-3", "0", "false"});
  CHECK_THROWS_AS(t.add_row({"1"}), std::invalid_argument);

  CHECK(to_csv(t) == "columns,policy,time_s,checksum,ok\n20000,guided,0.25,12.5,true\n10,\"a,b\",1e-3,0,false\n");

  const auto j = colphys::to_json(t, json{{"seed", 1}});
  CHECK(j["experiment"] == "run");
  CHECK(j["rows"][0]["columns"] == 20000);
  CHECK(j["rows"][0]["time_s"] == 0.25);
  CHECK(j["rows"][0]["policy"] == "guided");
  CHECK(j["rows"][0]["checksum"] == "12.5");
  CHECK(j["rows"][0]["ok"] == true);
  CHECK(j["config"]["seed"] == 1);

  const auto dir = std::filesystem::temp_directory_path() / "colphys_report_test";
  std::filesystem::remove_all(dir);
  write_report(dir.string(), t, json::object());
  std::ifstream csv(dir / "report.csv");
  std::stringstream body;
  body << csv.rdbuf();
  CHECK(body.str() == to_csv(t));
  std::ifstream js(dir / "report.json");
  CHECK(json::parse(js)["rows"].size() == 2);
  std::filesystem::remove_all(dir);
}
