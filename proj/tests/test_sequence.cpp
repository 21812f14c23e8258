#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "shb/analysis.hpp"
#include "shb/config.hpp"
#include "shb/scenario.hpp"
#include "shb/sequence.hpp"

using namespace shb;

namespace {

PumpPulse narrow_pump(double duration = 200.0) {
  PumpPulse p;
  p.duration_ms = duration;
  return p;
}

PumpPulse swept_pump(double span, double period, double duration = 200.0) {
  PumpPulse p = narrow_pump(duration);
  p.sweep_span_MHz = span;
  p.sweep_period_ms = period;
  return p;
}

double executed_sweeps(const Schedule& s, double period) {
  double t = 0.0;
  for (const auto& b : s.blocks) {
    if (std::any_of(b.pattern.begin(), b.pattern.end(), [](const auto& d) { return d.pump_freq_MHz.has_value(); }))
      t += b.end() - b.start();
  }
  return t / period;
}

EnsembleState test_ensemble() {
  InhomogeneousProfile p;
  p.grid_span_MHz = 120.0;
  p.grid_step_MHz = 0.5;
  ZeemanConfig z;
  z.field_mT = 1.2;
  return build_ensemble(p, z, RateParams{});
}

double max_difference(const Spectrum& a, const Spectrum& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.optical_depth[i] - b.optical_depth[i]));
  return d;
}

}  // namespace

TEST_CASE("compile") {
  SUBCASE("single unswept pump is one segment") {
    const Schedule s = compile({narrow_pump()});
    REQUIRE(s.blocks.size() == 1);
    CHECK(s.blocks[0].pattern.size() == 1);
    CHECK(s.blocks[0].repeats == 1);
    CHECK(s.sweep_count == 0);
    CHECK(s.end_ms == 200.0);
  }
  SUBCASE("2000 sweeps of 0.1 ms") {
    const Schedule s = compile({swept_pump(50.0, 0.1)});
    CHECK(s.sweep_count == 2000);
    CHECK(executed_sweeps(s, 0.1) == doctest::Approx(2000.0));
    // One representative period repeated, not 2000 copies.
    std::size_t segments = 0;
    for (const auto& b : s.blocks) segments += b.pattern.size();
    CHECK(segments <= 2 * kDefaultStepsPerSweep);
    CHECK(s.flatten().size() == 2000 * kDefaultStepsPerSweep);
  }
  SUBCASE("stimulation overhang leaves a 1 ms tail") {
    StimulationPulse stim;
    stim.start_ms = 0.0;
    stim.power_mW = 20.0;
    stim.duration_ms = 201.0;
    const Schedule s = compile({narrow_pump(), stim});
    const auto segs = s.flatten();
    REQUIRE(segs.size() == 2);
    CHECK(segs[1].t_start_ms == 200.0);
    CHECK(segs[1].duration() == doctest::Approx(1.0));
    CHECK(segs[1].stim_on);
    CHECK_FALSE(segs[1].pump_freq_MHz.has_value());
    CHECK(segs[1].stim_rate == doctest::Approx(7.0));
  }
  SUBCASE("pulses without a start follow each other") {
    const Schedule s = compile({narrow_pump(10.0), WaitPulse{5.0}, narrow_pump(10.0)});
    const auto segs = s.flatten();
    REQUIRE(segs.size() == 3);
    CHECK(segs[2].t_start_ms == 15.0);
    CHECK(s.end_ms == 25.0);
  }
  SUBCASE("readouts are placed after the preceding pulses") {
    const Schedule s = compile({narrow_pump(), ReadoutPulse{-1, 1, 3, 2.8}});
    REQUIRE(s.readouts.size() == 1);
    CHECK(s.readouts[0].time_ms == doctest::Approx(202.8));
  }
  SUBCASE("gated sweep leaves the center dark") {
    PumpPulse p = swept_pump(50.0, 0.1, 0.1);
    p.gate_gap_MHz = 3.0;
    for (const auto& seg : compile({p}).flatten()) {
      if (seg.pump_freq_MHz) CHECK(std::abs(*seg.pump_freq_MHz) >= 1.5);
    }
  }
  SUBCASE("errors") {
    PumpPulse a = narrow_pump(10.0), b = narrow_pump(10.0);
    b.start_ms = 5.0;
    CHECK_THROWS_AS(compile({a, b}), Error);
    CHECK_THROWS_AS(compile({narrow_pump(-1.0)}), Error);
    CHECK_THROWS_AS(compile({swept_pump(10.0, 0.0)}), Error);
    CompileOptions o;
    o.dt_max_ms = 0.0;
    CHECK_THROWS_AS(compile({narrow_pump()}, o), Error);
  }
}

TEST_CASE("class drive") {
  ZeemanConfig z;
  z.field_mT = 1.2;
  const TransitionSet lines = transition_set(0.0, z);
  DriveSegment seg;
  seg.pump_freq_MHz = lines[Transition::kG2E1];
  seg.pump_peak_rate = 2.0;
  seg.rf_on = true;
  seg.rf_rate = 5.0;
  seg.rf_center_MHz = 135.0;
  seg.rf_bandwidth_MHz = 15.0;
  const DriveRates d = class_drive(seg, lines, excited_splitting(z), 1.0);
  CHECK(d.pump_rate[2] == 2.0);
  CHECK(d.pump_rate[0] < 1e-4);
  CHECK(d.rf_mix_rate == 5.0);
  seg.rf_center_MHz = 160.0;
  CHECK(class_drive(seg, lines, excited_splitting(z), 1.0).rf_mix_rate == 0.0);
  // Soft edge: 160 - 7.5 - 134.36 = 18.14 MHz outside the band.
  seg.rf_edge_MHz = 10.0;
  const double outside = 160.0 - 7.5 - excited_splitting(z);
  CHECK(class_drive(seg, lines, excited_splitting(z), 1.0).rf_mix_rate ==
        doctest::Approx(5.0 * std::exp(-(outside / 10.0) * (outside / 10.0))));
}

TEST_CASE("run") {
  SUBCASE("empty sequence reproduces the baseline") {
    EnsembleState e = test_ensemble();
    const RunResult r = run(e, compile({ReadoutPulse{-50, 50, 101, 0.0}}));
    REQUIRE(r.spectra.size() == 1);
    CHECK(max_difference(r.spectra[0].spectrum, r.spectra[0].baseline) == 0.0);
    CHECK(r.trace[0].hole_area == 0.0);
  }
  SUBCASE("readout beyond the horizon") {
    EnsembleState e = test_ensemble();
    Schedule s = compile({narrow_pump(10.0)});
    CHECK_THROWS_AS(run(e, s, {ReadoutRequest{50.0, 40.0, ReadoutPulse{}}}), Error);
  }
  SUBCASE("populations stay normalized") {
    EnsembleState e = test_ensemble();
    StimulationPulse stim{0.0, 10.0, 50.0};
    RfPulse rf{0.0, 135.0, 15.0, 0.001, 10.0, 50.0};
    run(e, compile({swept_pump(10.0, 0.1, 40.0), stim, rf}), RunOptions{});
    for (const auto& c : e.classes) CHECK(std::abs(c.state.total() - 1.0) < 1e-9);
  }
}

TEST_CASE("refinement invariance") {
  const ReadoutPulse ro{-60, 60, 241, 0.5};
  SUBCASE("unswept pulses are exact") {
    CompileOptions coarse, fine;
    coarse.dt_max_ms = 0.2;
    fine.dt_max_ms = 0.1;
    StimulationPulse stim{0.0, 5.0, 12.0};
    EnsembleState a = test_ensemble(), b = test_ensemble();
    const auto ra = run(a, compile({narrow_pump(10.0), stim, ro}, coarse));
    const auto rb = run(b, compile({narrow_pump(10.0), stim, ro}, fine));
    CHECK(max_difference(ra.spectra[0].spectrum, rb.spectra[0].spectrum) < 1e-6);
  }
  SUBCASE("swept pulses within 1 % at the default step") {
    CompileOptions half;
    half.dt_max_ms = 0.1 / kDefaultStepsPerSweep / 2.0;
    EnsembleState a = test_ensemble(), b = test_ensemble();
    const auto ra = run(a, compile({swept_pump(10.0, 0.1, 20.0), ro}));
    const auto rb = run(b, compile({swept_pump(10.0, 0.1, 20.0), ro}, half));
    CHECK(max_difference(ra.spectra[0].spectrum, rb.spectra[0].spectrum) < 0.01);
  }
}

TEST_CASE("determinism and thread independence") {
  const ReadoutPulse ro{-60, 60, 241, 0.5};
  EnsembleState a = test_ensemble(), b = test_ensemble(), c = test_ensemble();
  const Schedule s = compile({swept_pump(10.0, 0.1, 20.0), ro});
  const auto ra = run(a, s);
  const auto rb = run(b, s);
  RunOptions threaded;
  threaded.threads = 3;
  const auto rc = run(c, s, threaded);
  CHECK(ra.spectra[0].spectrum.optical_depth == rb.spectra[0].spectrum.optical_depth);
  CHECK(ra.spectra[0].spectrum.optical_depth == rc.spectra[0].spectrum.optical_depth);
}

TEST_CASE("standard pumping trace is dominated by T1") {
  const Simulation sim = simulate(preset("fig3_standard_pumping"));
  XYData d;
  for (const auto& p : sim.run.trace) {
    d.x.push_back(p.delay_ms);
    d.y.push_back(p.hole_area);
  }
  const FitResult f = fit_double_exponential(d);
  CHECK(f.value("tau1") == doctest::Approx(11.0).epsilon(0.1));
  CHECK(f.value("A1") > 5.0 * f.value("A2"));
}

TEST_CASE("stimulated pumping trace is dominated by the slow decay") {
  ExperimentConfig c = preset("fig3_standard_pumping");
  c.sequence.insert(c.sequence.begin() + 1, StimulationPulse{0.0, 20.0, 201.0});
  const Simulation sim = simulate(c);
  XYData d;
  for (const auto& p : sim.run.trace) {
    d.x.push_back(p.delay_ms);
    d.y.push_back(p.hole_area);
  }
  const FitResult f = fit_double_exponential(d);
  // After the 1 ms tail the excited state is nearly empty, so what is left
  // is the Zeeman redistribution.
  const double slow = f.value("A2"), fast = f.value("A1");
  CHECK(slow > fast);
  CHECK(f.value("tau2") == doctest::Approx(130.0).epsilon(0.05));
}

TEST_CASE("trace csv") {
  std::ostringstream out;
  write_trace_csv(out, {{1.0, 0.5}, {2.0, 0.25}});
  CHECK(out.str() == "delay_ms,hole_area\n1,0.5\n2,0.25\n");
}
