#include "shb/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include "shb/csv.hpp"

namespace shb {

namespace {

constexpr double kTimeEps = 1e-9;

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct PlacedPump {
  Interval span;
  PumpPulse pulse;
};

struct PlacedLevel {
  Interval span;
  double rate = 0.0;
  double rf_center = 0.0;
  double rf_bandwidth = 0.0;
  double rf_edge = 0.0;
};

template <typename T>
const T* active_at(const std::vector<T>& items, double t) {
  for (const auto& item : items) {
    if (item.span.start <= t && t < item.span.end) return &item;
  }
  return nullptr;
}

template <typename T>
void check_no_overlap(std::vector<T> items, const char* channel) {
  std::sort(items.begin(), items.end(),
            [](const T& a, const T& b) { return a.span.start < b.span.start; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].span.start < items[i - 1].span.end - kTimeEps) {
      throw Error(std::string("overlapping ") + channel + " pulses on the same channel");
    }
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error("compile: " + message);
}

class SweepEmitter {
 public:
  SweepEmitter(const PlacedPump& pump, const DriveSegment& base, double dt_max)
      : pump_(pump), base_(base) {
    const double period = pump.pulse.sweep_period_ms;
    steps_ = std::max<long>(1, static_cast<long>(std::ceil(period / dt_max - 1e-9)));
    step_ = period / static_cast<double>(steps_);
  }

  std::vector<DriveSegment> range(double from, double to) const {
    std::vector<DriveSegment> out;
    const double p0 = pump_.span.start;
    auto k = static_cast<long>(std::floor((from - p0) / step_ + 1e-9));
    for (;; ++k) {
      const double s = p0 + static_cast<double>(k) * step_;
      const double e = p0 + static_cast<double>(k + 1) * step_;
      if (s >= to - kTimeEps) break;
      const double lo = std::max(from, s);
      const double hi = std::min(to, e);
      if (hi - lo <= kTimeEps) continue;
      DriveSegment seg = base_;
      seg.t_start_ms = lo;
      seg.t_end_ms = hi;
      const double f = frequency(k);
      if (std::abs(f - pump_.pulse.center_MHz) >= 0.5 * pump_.pulse.gate_gap_MHz) {
        seg.pump_freq_MHz = f;
        seg.pump_peak_rate = pump_.pulse.power_rate;
      }
      out.push_back(seg);
    }
    return out;
  }

 private:
  // Sawtooth: each period ramps linearly from center - span/2 to center + span/2.
  double frequency(long k) const {
    const long idx = ((k % steps_) + steps_) % steps_;
    const double phase = (static_cast<double>(idx) + 0.5) / static_cast<double>(steps_);
    const auto& p = pump_.pulse;
    return p.center_MHz - 0.5 * p.sweep_span_MHz + p.sweep_span_MHz * phase;
  }

  const PlacedPump& pump_;
  DriveSegment base_;
  long steps_ = 1;
  double step_ = 0.0;
};

std::vector<DriveSegment> shifted(std::vector<DriveSegment> segs, double by) {
  for (auto& s : segs) {
    s.t_start_ms += by;
    s.t_end_ms += by;
  }
  return segs;
}

}  // namespace

std::vector<DriveSegment> Schedule::flatten() const {
  std::vector<DriveSegment> out;
  for (const auto& block : blocks) {
    const double period = block.period();
    for (std::uint64_t r = 0; r < block.repeats; ++r) {
      const auto rep = shifted(block.pattern, period * static_cast<double>(r));
      out.insert(out.end(), rep.begin(), rep.end());
    }
  }
  return out;
}

void Schedule::split_at(double t_ms) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const SegmentBlock block = blocks[b];
    if (!(block.start() < t_ms - kTimeEps && t_ms + kTimeEps < block.end())) continue;

    const double period = block.period();
    auto r = static_cast<std::uint64_t>(std::floor((t_ms - block.start()) / period));
    r = std::min(r, block.repeats - 1);
    const double rep_start = block.start() + period * static_cast<double>(r);

    std::vector<SegmentBlock> parts;
    auto push = [&](std::vector<DriveSegment> pattern, std::uint64_t repeats) {
      if (!pattern.empty() && repeats > 0) parts.push_back({std::move(pattern), repeats});
    };

    if (std::abs(t_ms - rep_start) <= kTimeEps) {
      push(block.pattern, r);
      push(shifted(block.pattern, rep_start - block.start()), block.repeats - r);
    } else {
      push(block.pattern, r);
      std::vector<DriveSegment> head;
      std::vector<DriveSegment> tail;
      for (auto seg : shifted(block.pattern, rep_start - block.start())) {
        if (seg.t_end_ms <= t_ms + kTimeEps) {
          head.push_back(seg);
        } else if (seg.t_start_ms >= t_ms - kTimeEps) {
          tail.push_back(seg);
        } else {
          DriveSegment first = seg;
          first.t_end_ms = t_ms;
          seg.t_start_ms = t_ms;
          head.push_back(first);
          tail.push_back(seg);
        }
      }
      push(head, 1);
      push(tail, 1);
      push(shifted(block.pattern, rep_start + period - block.start()),
           block.repeats - r - 1);
    }
    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(b));
    blocks.insert(blocks.begin() + static_cast<std::ptrdiff_t>(b), parts.begin(), parts.end());
    return;
  }
}

Schedule compile(const std::vector<Pulse>& pulses, const CompileOptions& options) {
  if (options.dt_max_ms && !(*options.dt_max_ms > 0.0)) {
    throw Error("compile: dt_max_ms must be positive");
  }

  std::vector<PlacedPump> pumps;
  std::vector<PlacedLevel> stims;
  std::vector<PlacedLevel> rfs;
  Schedule schedule;
  double latest = 0.0;

  auto place = [&](const std::optional<double>& start, double duration) {
    require(duration >= 0.0, "pulse duration must be non-negative");
    const double s = start.value_or(latest);
    require(s >= 0.0, "pulse start must be non-negative");
    latest = std::max(latest, s + duration);
    return Interval{s, s + duration};
  };

  for (const auto& pulse : pulses) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, PumpPulse>) {
            require(p.sweep_span_MHz >= 0.0, "sweep span must be non-negative");
            require(p.sweep_span_MHz == 0.0 || p.sweep_period_ms > 0.0,
                    "swept pump needs a positive sweep period");
            require(p.gate_gap_MHz >= 0.0, "gate gap must be non-negative");
            require(p.gate_gap_MHz == 0.0 || p.gate_gap_MHz < p.sweep_span_MHz,
                    "gate gap must be smaller than the sweep span");
            require(p.power_rate >= 0.0, "pump rate must be non-negative");
            const Interval span = place(p.start_ms, p.duration_ms);
            if (p.duration_ms > 0.0) {
              pumps.push_back({span, p});
              schedule.pump_end_times_ms.push_back(span.end);
              if (p.sweep_span_MHz > 0.0) {
                schedule.sweep_count += static_cast<std::uint64_t>(
                    std::ceil(p.duration_ms / p.sweep_period_ms - 1e-9));
              }
            }
          } else if constexpr (std::is_same_v<T, StimulationPulse>) {
            require(p.power_mW >= 0.0, "stimulation power must be non-negative");
            require(p.response_fwhm_MHz > 0.0, "stimulation response width must be positive");
            const Interval span = place(p.start_ms, p.duration_ms);
            const double gamma =
                stimulation_rate(p.power_mW, options.stim_slope_per_mW_ms) *
                lorentzian(p.detuning_MHz, p.response_fwhm_MHz);
            if (p.duration_ms > 0.0) stims.push_back({span, gamma});
          } else if constexpr (std::is_same_v<T, RfPulse>) {
            require(p.bandwidth_MHz >= 0.0, "RF bandwidth must be non-negative");
            require(p.sweep_period_ms > 0.0, "RF sweep period must be positive");
            require(p.edge_MHz >= 0.0, "RF edge width must be non-negative");
            const Interval span = place(p.start_ms, p.duration_ms);
            if (p.duration_ms > 0.0) {
              rfs.push_back({span, rf_mix_rate(p.voltage_Vpp, options.rf_coupling_per_V2_ms),
                             p.center_MHz, p.bandwidth_MHz, p.edge_MHz});
            }
          } else if constexpr (std::is_same_v<T, WaitPulse>) {
            place(std::nullopt, p.duration_ms);
          } else {
            require(p.at_delay_ms >= 0.0, "readout delay must be non-negative");
            require(p.f_start_MHz < p.f_stop_MHz && p.n_points >= 2,
                    "readout needs f_start < f_stop and at least 2 points");
            schedule.readouts.push_back({latest + p.at_delay_ms, p.at_delay_ms, p});
          }
        },
        pulse);
  }

  check_no_overlap(pumps, "pump");
  check_no_overlap(stims, "stimulation");
  check_no_overlap(rfs, "RF");

  schedule.end_ms = latest;
  std::vector<double> cuts = {0.0, latest};
  for (const auto& r : schedule.readouts) {
    schedule.end_ms = std::max(schedule.end_ms, r.time_ms);
    cuts.push_back(r.time_ms);
  }
  cuts.push_back(schedule.end_ms);
  for (const auto& p : pumps) cuts.insert(cuts.end(), {p.span.start, p.span.end});
  for (const auto& s : stims) cuts.insert(cuts.end(), {s.span.start, s.span.end});
  for (const auto& r : rfs) cuts.insert(cuts.end(), {r.span.start, r.span.end});
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) <= kTimeEps; }),
             cuts.end());

  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double a = cuts[i - 1];
    const double b = cuts[i];
    if (b - a <= kTimeEps) continue;
    const double mid = 0.5 * (a + b);

    DriveSegment base;
    base.t_start_ms = a;
    base.t_end_ms = b;
    if (const auto* s = active_at(stims, mid)) {
      base.stim_on = true;
      base.stim_rate = s->rate;
    }
    if (const auto* r = active_at(rfs, mid)) {
      base.rf_on = true;
      base.rf_rate = r->rate;
      base.rf_center_MHz = r->rf_center;
      base.rf_bandwidth_MHz = r->rf_bandwidth;
      base.rf_edge_MHz = r->rf_edge;
    }

    const PlacedPump* pump = active_at(pumps, mid);
    if (pump == nullptr || pump->pulse.sweep_span_MHz == 0.0) {
      if (pump != nullptr) {
        base.pump_freq_MHz = pump->pulse.center_MHz;
        base.pump_peak_rate = pump->pulse.power_rate;
      }
      schedule.blocks.push_back({{base}, 1});
      continue;
    }

    const double period = pump->pulse.sweep_period_ms;
    const double dt_max = options.dt_max_ms.value_or(period / kDefaultStepsPerSweep);
    const SweepEmitter emitter(*pump, base, dt_max);
    auto push_range = [&](double from, double to, std::uint64_t repeats) {
      auto segs = emitter.range(from, to);
      if (!segs.empty()) schedule.blocks.push_back({std::move(segs), repeats});
    };

    const double p0 = pump->span.start;
    const double j0 = std::ceil((a - p0) / period - 1e-9);
    const double first_full = p0 + j0 * period;
    if (first_full + period > b + kTimeEps) {
      push_range(a, b, 1);
      continue;
    }
    const auto full = static_cast<std::uint64_t>(std::floor((b - first_full) / period + 1e-9));
    push_range(a, first_full, 1);
    push_range(first_full, first_full + period, full);
    push_range(first_full + period * static_cast<double>(full), b, 1);
  }
  return schedule;
}

DriveRates class_drive(const DriveSegment& segment, const TransitionSet& lines,
                       double excited_splitting_MHz, double laser_linewidth_MHz,
                       Lineshape laser_lineshape) {
  DriveRates drive;
  if (segment.pump_freq_MHz) {
    for (Transition t : kAllTransitions) {
      drive.pump_rate[static_cast<std::size_t>(t)] = pump_rate_profile(
          segment.pump_peak_rate, laser_linewidth_MHz, *segment.pump_freq_MHz - lines[t],
          laser_lineshape);
    }
  }
  if (segment.stim_on) {
    drive.stim_rate_e1 = segment.stim_rate;
    drive.stim_rate_e2 = segment.stim_rate;
  }
  if (segment.rf_on) {
    const double outside =
        std::abs(excited_splitting_MHz - segment.rf_center_MHz) - 0.5 * segment.rf_bandwidth_MHz;
    if (outside <= 0.0) {
      drive.rf_mix_rate = segment.rf_rate;
    } else if (segment.rf_edge_MHz > 0.0) {
      const double x = outside / segment.rf_edge_MHz;
      drive.rf_mix_rate = segment.rf_rate * std::exp(-x * x);
    }
  }
  return drive;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

void evolve_block(EnsembleState& ensemble, const SegmentBlock& block,
                  const RunOptions& options) {
  const double de = excited_splitting(ensemble.config);
  const auto& params = ensemble.params;

  // Dark-pump segments act identically on every class.
  std::vector<std::optional<RateMatrix>> shared(block.pattern.size());
  bool all_shared = true;
  for (std::size_t k = 0; k < block.pattern.size(); ++k) {
    const auto& seg = block.pattern[k];
    if (seg.pump_freq_MHz) {
      all_shared = false;
      continue;
    }
    const DriveRates drive = class_drive(seg, TransitionSet{}, de, options.laser_linewidth_MHz,
                                         options.laser_lineshape);
    shared[k] = propagator(build_rate_matrix(params, drive), seg.duration());
  }

  auto class_propagator = [&](const TransitionSet& lines) {
    RateMatrix u = RateMatrix::Identity();
    for (std::size_t k = 0; k < block.pattern.size(); ++k) {
      const auto& seg = block.pattern[k];
      if (shared[k]) {
        u = *shared[k] * u;
      } else {
        const DriveRates drive = class_drive(seg, lines, de, options.laser_linewidth_MHz,
                                             options.laser_lineshape);
        u = propagator(build_rate_matrix(params, drive), seg.duration()) * u;
      }
    }
    return block.repeats > 1 ? matrix_power(u, block.repeats) : u;
  };

  if (all_shared) {
    const RateMatrix u = class_propagator(TransitionSet{});
    for (auto& c : ensemble.classes) c.state = apply(u, c.state);
    return;
  }
  parallel_for(ensemble.classes.size(), options.threads, [&](std::size_t i) {
    auto& c = ensemble.classes[i];
    c.state = apply(class_propagator(transition_set(c.center_MHz, ensemble.config)), c.state);
  });
}

}  // namespace

RunResult run(EnsembleState& ensemble, Schedule schedule,
              const std::vector<ReadoutRequest>& readouts, const RunOptions& options) {
  std::vector<ReadoutRequest> pending = readouts;
  std::stable_sort(pending.begin(), pending.end(),
                   [](const auto& a, const auto& b) { return a.time_ms < b.time_ms; });
  for (const auto& r : pending) {
    if (r.time_ms > schedule.end_ms + kTimeEps) {
      throw Error("readout at " + std::to_string(r.time_ms) +
                  " ms lies beyond the simulated horizon of " +
                  std::to_string(schedule.end_ms) + " ms");
    }
    schedule.split_at(r.time_ms);
  }
  for (double t : schedule.pump_end_times_ms) schedule.split_at(t);

  using ScanKey = std::tuple<double, double, std::size_t>;
  std::map<ScanKey, Spectrum> baselines;
  for (const auto& r : pending) {
    const ScanKey key{r.scan.f_start_MHz, r.scan.f_stop_MHz, r.scan.n_points};
    if (!baselines.contains(key)) {
      baselines.emplace(key, readout_scan(ensemble, r.scan.f_start_MHz, r.scan.f_stop_MHz,
                                          r.scan.n_points));
    }
  }

  RunResult result;
  std::size_t next = 0;
  auto capture_until = [&](double t) {
    while (next < pending.size() && pending[next].time_ms <= t + kTimeEps) {
      const auto& r = pending[next++];
      Snapshot snap;
      snap.time_ms = r.time_ms;
      snap.delay_ms = r.delay_ms;
      snap.spectrum = readout_scan(ensemble, r.scan.f_start_MHz, r.scan.f_stop_MHz,
                                   r.scan.n_points);
      snap.baseline = baselines.at({r.scan.f_start_MHz, r.scan.f_stop_MHz, r.scan.n_points});
      const FrequencyWindow window = options.trace_window.value_or(
          FrequencyWindow{r.scan.f_start_MHz, r.scan.f_stop_MHz});
      result.trace.push_back({r.delay_ms, hole_area(snap.spectrum, snap.baseline, window)});
      result.spectra.push_back(std::move(snap));
    }
  };

  capture_until(0.0);
  for (const auto& block : schedule.blocks) {
    evolve_block(ensemble, block, options);
    const double t = block.end();
    const double f = ensemble.params.persistent_fraction;
    if (f > 0.0 && std::any_of(schedule.pump_end_times_ms.begin(),
                               schedule.pump_end_times_ms.end(),
                               [t](double e) { return std::abs(e - t) <= kTimeEps; })) {
      for (auto& c : ensemble.classes) c.state = apply_persistent_bleaching(c.state, f);
    }
    capture_until(t);
  }
  capture_until(schedule.end_ms);
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "delay_ms,hole_area\n";
  for (const auto& p : trace) {
    out << csv::format_number(p.delay_ms) << ',' << csv::format_number(p.hole_area) << '\n';
  }
}

}  // namespace shb
