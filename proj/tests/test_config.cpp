#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "shb/config.hpp"
#include "shb/scenario.hpp"

using namespace shb;

namespace {

const char* kMinimal = R"({
  "sequence": {"pulses": [
    {"type": "pump", "duration_ms": 10},
    {"type": "readout", "f_start_MHz": -20, "f_stop_MHz": 20, "n_points": 81, "at_delay_ms": 1}
  ]}
})";

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& path) {
  for (const auto& i : issues) {
    if (i.rfind(path + ":", 0) == 0) return true;
  }
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("shb_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.laser_linewidth_MHz == 1.0);
  CHECK(c.laser_lineshape == Lineshape::kLorentzian);
  CHECK(c.profile.grid_step_MHz == 0.25);
  CHECK_FALSE(c.compile.dt_max_ms.has_value());
  CHECK(c.rates.beta_z2 == c.rates.beta);
  CHECK(c.sequence.size() == 2);
  CHECK(std::get<PumpPulse>(c.sequence[0]).duration_ms == 10.0);
}

TEST_CASE("beta_z2 follows beta unless given") {
  const auto c = parse_config(R"({"rates": {"beta": 0.95}, "sequence": {"pulses": []}})");
  CHECK(c.rates.beta_z2 == 0.95);
  const auto d = parse_config(R"({"rates": {"beta": 0.95, "beta_z2": 0.5}, "sequence": {"pulses": []}})");
  CHECK(d.rates.beta_z2 == 0.5);
}

TEST_CASE("strict parsing") {
  SUBCASE("range error names the field") {
    CHECK(mentions(issues_of(R"({"rates": {"beta": 1.2}, "sequence": {"pulses": []}})"), "rates.beta"));
  }
  SUBCASE("unknown keys") {
    CHECK(mentions(issues_of(R"({"ratez": {}, "sequence": {"pulses": []}})"), "ratez"));
    CHECK(mentions(issues_of(R"({"rates": {"t2_ms": 1}, "sequence": {"pulses": []}})"), "rates.t2_ms"));
  }
  SUBCASE("pulse paths carry the index") {
    const auto issues = issues_of(R"({"sequence": {"pulses": [
      {"type": "wait", "duration_ms": 1},
      {"type": "wait", "duration_ms": 1},
      {"type": "pump", "duration_ms": -3}]}})");
    CHECK(mentions(issues, "sequence.pulses[2].duration_ms"));
  }
  SUBCASE("several problems are reported together") {
    const auto issues = issues_of(R"({"rates": {"t1_ms": -1, "tz_ms": 0}, "sequence": {"pulses": []}})");
    CHECK(issues.size() == 2);
  }
  SUBCASE("type errors and bad json") {
    CHECK(mentions(issues_of(R"({"rates": {"t1_ms": "11"}, "sequence": {"pulses": []}})"), "rates.t1_ms"));
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK(mentions(issues_of(R"({"sequence": {"pulses": [{"type": "laser"}]}})"), "sequence.pulses[0].type"));
  }
  SUBCASE("overlapping pumps are rejected at parse time") {
    CHECK_FALSE(issues_of(R"({"sequence": {"pulses": [
      {"type": "pump", "start_ms": 0, "duration_ms": 10},
      {"type": "pump", "start_ms": 5, "duration_ms": 10}]}})").empty());
  }
  SUBCASE("output files must be distinct") {
    CHECK_FALSE(issues_of(R"({"sequence": {"pulses": []},
      "outputs": {"trace_file": "x.csv", "baseline_file": "x.csv"}})").empty());
    CHECK_FALSE(issues_of(R"({"sequence": {"pulses": []}, "outputs": {"trace_file": "../x.csv"}})").empty());
  }
  SUBCASE("scan problems") {
    CHECK_FALSE(issues_of(R"({"sequence": {"pulses": []}, "scan": {"axes": []}})").empty());
    CHECK_FALSE(issues_of(R"({"sequence": {"pulses": []},
      "scan": {"axes": [{"name": "v", "path": "/x", "values": [1]}], "observable": "colour"}})").empty());
  }
}

TEST_CASE("serialization roundtrip") {
  for (const auto& info : list_presets()) {
    CAPTURE(info.name);
    const ExperimentConfig c = preset(info.name);
    const ExperimentConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
  }
  ExperimentConfig c = parse_config(kMinimal);
  const auto h = config_hash(c);
  c.rates.tz_ms = 131.0;
  CHECK(config_hash(c) != h);
}

TEST_CASE("presets") {
  CHECK(list_presets().size() == 6);
  CHECK_THROWS_WITH_AS(preset("fig8"), doctest::Contains("fig3_standard_pumping"), Error);

  SUBCASE("tailoring preset") {
    const ExperimentConfig c = preset("fig7_tailoring");
    const auto& pump = std::get<PumpPulse>(c.sequence[0]);
    CHECK(pump.duration_ms == 200.0);
    CHECK(pump.sweep_span_MHz == 50.0);
    CHECK(pump.sweep_period_ms == 0.1);
    // The dark gap sets the width of the line left at the center.
    CHECK(pump.gate_gap_MHz > 1.0);
    CHECK(pump.gate_gap_MHz < 5.0);
    CHECK(compile(c.sequence, c.compile).sweep_count == 2000);
  }
  SUBCASE("physical parameters") {
    for (const auto& info : list_presets()) {
      const ExperimentConfig c = preset(info.name);
      CHECK(c.rates.t1_ms == 11.0);
      CHECK(c.profile.alpha_l0 == 1.0);
      CHECK(c.rates.beta >= 0.9);
      CHECK(c.rates.beta <= 0.95);
      for (const auto& p : c.sequence) {
        if (const auto* rf = std::get_if<RfPulse>(&p)) {
          CHECK(rf->center_MHz == 135.0);
          CHECK(rf->bandwidth_MHz >= 10.0);
          CHECK(rf->bandwidth_MHz <= 20.0);
        }
      }
    }
    const auto s = preset("stimulated_pumping");
    const auto& stim = std::get<StimulationPulse>(s.sequence[1]);
    CHECK(stim.duration_ms - std::get<PumpPulse>(s.sequence[0]).duration_ms == doctest::Approx(1.0));
  }
}

TEST_CASE("with_value writes through a JSON pointer") {
  const ExperimentConfig c = preset("fig6_rf_power");
  const ExperimentConfig d = with_value(c, "/sequence/pulses/2/voltage_Vpp", 3.5);
  CHECK(std::get<RfPulse>(d.sequence[2]).voltage_Vpp == 3.5);
  CHECK(d.scan == c.scan);
  CHECK_THROWS_AS(with_value(c, "/sequence/pulses/2/volts", 1.0), ConfigError);
  CHECK_THROWS_AS(with_value(c, "no-slash", 1.0), Error);
}

TEST_CASE("scenario outputs") {
  SUBCASE("standard pumping writes a trace and a fit") {
    const auto dir = scratch_dir("fig3");
    const ExperimentConfig c = preset("fig3_standard_pumping");
    const ScenarioReport r = run_scenario(c, dir);
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    CHECK(std::filesystem::exists(dir / "spectrum_015.csv"));
    CHECK(std::filesystem::exists(dir / "baseline.csv"));
    const std::string fit = slurp(dir / "fit.json");
    CHECK(fit.find("\"tau1\"") != std::string::npos);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("fnv1a64:") != std::string::npos);
    CHECK(manifest.find("\"version\": \"0.1.0\"") != std::string::npos);

    // Fast component dominates after standard pumping.
    XYData d;
    for (const auto& p : r.simulation->run.trace) {
      d.x.push_back(p.delay_ms);
      d.y.push_back(p.hole_area);
    }
    const FitResult f = fit_double_exponential(d);
    CHECK(f.value("A1") > 5.0 * f.value("A2"));
  }
  SUBCASE("identical configs give byte-identical files") {
    ExperimentConfig c = preset("stimulated_pumping");
    c.outputs.trace_noise_sigma = 0.01;
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    run_scenario(c, a);
    run_scenario(c, b);
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;  // carries the wall time
      CHECK(slurp(entry.path()) == slurp(b / name));
    }
    CHECK(slurp(a / "metrics.json").find("rho1_res") != std::string::npos);
  }
  SUBCASE("empty sequence leaves the baseline") {
    const auto dir = scratch_dir("empty");
    const ExperimentConfig c = parse_config(R"({"sequence": {"pulses": [
      {"type": "readout", "f_start_MHz": -20, "f_stop_MHz": 20, "n_points": 41, "at_delay_ms": 0}]}})");
    run_scenario(c, dir);
    CHECK(slurp(dir / "spectrum_000.csv") == slurp(dir / "baseline.csv"));
  }
  SUBCASE("rf voltage curve falls then flattens") {
    const ScanResult r = run_scan(preset("fig6_rf_power"));
    REQUIRE(r.points.size() == 11);
    for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].value <= r.points[i - 1].value + 1e-12);
    const double early = r.points[0].value - r.points[5].value;
    const double late = r.points[5].value - r.points[10].value;
    CHECK(late < 0.25 * early);
  }
}

TEST_CASE("fit helpers") {
  const XYData line{{0, 1, 2}, {1, 3, 5}};
  const FitResult f = fit_by_name("linear", line);
  CHECK(f.value("slope") == doctest::Approx(2.0));
  CHECK(fit_result_json(f).find("\"model\": \"linear\"") != std::string::npos);
  CHECK_THROWS_AS(fit_by_name("cubic", line), Error);
}
