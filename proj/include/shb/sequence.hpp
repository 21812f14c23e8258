#pragma once

// Pulse sequences: declarative pulses, compilation into piecewise-constant
// drive segments, and execution against an ensemble.
//
// Timing rules:
//  * a pulse without an explicit start begins at the latest end time of all
//    pulses placed before it;
//  * a readout is taken `at_delay_ms` after the latest end time of the pulses
//    listed before it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shb/ensemble.hpp"

namespace shb {

struct PumpPulse {
  std::optional<double> start_ms;
  double center_MHz = 0.0;
  double sweep_span_MHz = 0.0;
  double sweep_period_ms = 0.0;
  double gate_gap_MHz = 0.0;
  double power_rate = 1.0;  // peak optical pump rate, 1/ms
  double duration_ms = 0.0;

  bool operator==(const PumpPulse&) const = default;
};

struct StimulationPulse {
  std::optional<double> start_ms;
  double power_mW = 0.0;
  double duration_ms = 0.0;
  // Laser detuning from the Y1 -> Z2 line and the width of that line. The
  // resulting Lorentzian factor multiplies the resonant rate.
  double detuning_MHz = 0.0;
  double response_fwhm_MHz = 14000.0;

  bool operator==(const StimulationPulse&) const = default;
};

struct RfPulse {
  std::optional<double> start_ms;
  double center_MHz = 0.0;
  double bandwidth_MHz = 0.0;
  double sweep_period_ms = 0.001;
  double voltage_Vpp = 0.0;
  double duration_ms = 0.0;
  // Gaussian roll-off width outside the band; 0 keeps hard band edges.
  double edge_MHz = 0.0;

  bool operator==(const RfPulse&) const = default;
};

struct WaitPulse {
  double duration_ms = 0.0;

  bool operator==(const WaitPulse&) const = default;
};

struct ReadoutPulse {
  double f_start_MHz = -100.0;
  double f_stop_MHz = 100.0;
  std::size_t n_points = 401;
  double at_delay_ms = 0.0;

  bool operator==(const ReadoutPulse&) const = default;
};

using Pulse = std::variant<PumpPulse, StimulationPulse, RfPulse, WaitPulse, ReadoutPulse>;

struct DriveSegment {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  std::optional<double> pump_freq_MHz;  // unset: pump dark
  double pump_peak_rate = 0.0;
  bool stim_on = false;
  double stim_rate = 0.0;  // Gamma, 1/ms
  bool rf_on = false;
  double rf_rate = 0.0;  // 1/ms
  double rf_center_MHz = 0.0;
  double rf_bandwidth_MHz = 0.0;
  double rf_edge_MHz = 0.0;

  double duration() const { return t_end_ms - t_start_ms; }
};

/// `pattern` describes the first repetition; repetition r is shifted by
/// r * period().
struct SegmentBlock {
  std::vector<DriveSegment> pattern;
  std::uint64_t repeats = 1;

  double start() const { return pattern.front().t_start_ms; }
  double period() const { return pattern.back().t_end_ms - pattern.front().t_start_ms; }
  double end() const { return start() + period() * static_cast<double>(repeats); }
};

struct ReadoutRequest {
  double time_ms = 0.0;
  double delay_ms = 0.0;
  ReadoutPulse scan;
};

struct Schedule {
  std::vector<SegmentBlock> blocks;
  std::vector<ReadoutRequest> readouts;
  std::vector<double> pump_end_times_ms;
  std::uint64_t sweep_count = 0;
  double end_ms = 0.0;

  /// Every segment in time order, repetitions expanded.
  std::vector<DriveSegment> flatten() const;
  /// Inserts a block boundary at `t_ms` (no-op on an existing boundary).
  void split_at(double t_ms);
};

struct CompileOptions {
  // Upper bound on the step of swept pulses; unset means sweep_period / 50.
  std::optional<double> dt_max_ms;
  double stim_slope_per_mW_ms = 0.35;
  double rf_coupling_per_V2_ms = 0.2;

  bool operator==(const CompileOptions&) const = default;
};

inline constexpr int kDefaultStepsPerSweep = 50;

Schedule compile(const std::vector<Pulse>& pulses, const CompileOptions& options = {});

struct RunOptions {
  double laser_linewidth_MHz = 1.0;
  Lineshape laser_lineshape = Lineshape::kLorentzian;
  unsigned threads = 1;
  // Hole-area window for the trace; unset integrates each full readout scan.
  std::optional<FrequencyWindow> trace_window;
};

struct Snapshot {
  double time_ms = 0.0;
  double delay_ms = 0.0;
  Spectrum spectrum;
  Spectrum baseline;
};

struct TracePoint {
  double delay_ms = 0.0;
  double hole_area = 0.0;
};

struct RunResult {
  std::vector<Snapshot> spectra;
  std::vector<TracePoint> trace;
};

/// Per-class drive for one segment.
DriveRates class_drive(const DriveSegment& segment, const TransitionSet& lines,
                       double excited_splitting_MHz, double laser_linewidth_MHz,
                       Lineshape laser_lineshape = Lineshape::kLorentzian);

/// Evolves `ensemble` through `schedule`, capturing the requested readouts.
/// The baseline of every snapshot is the ensemble as passed in.
RunResult run(EnsembleState& ensemble, Schedule schedule,
              const std::vector<ReadoutRequest>& readouts,
              const RunOptions& options = {});

inline RunResult run(EnsembleState& ensemble, const Schedule& schedule,
                     const RunOptions& options = {}) {
  return run(ensemble, schedule, schedule.readouts, options);
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

}  // namespace shb
