#include "shb/scenario.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json_internal.hpp"
#include "shb/csv.hpp"

namespace shb {

using nlohmann::json;

namespace {

ReadoutPulse first_readout(const std::vector<Pulse>& sequence) {
  for (const auto& p : sequence) {
    if (const auto* r = std::get_if<ReadoutPulse>(&p)) return *r;
  }
  return ReadoutPulse{};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json metrics_json(const ResidualMetrics& m) {
  json j = {{"rho1_res", m.rho1_res},
            {"remaining_total_fraction", m.remaining_total_fraction},
            {"spin_polarization", m.spin_polarization}};
  if (m.rho1_res > 0.0) j["population_ratio"] = population_ratio_from_residual(m.rho1_res);
  return j;
}

}  // namespace

Simulation simulate(const ExperimentConfig& config, unsigned threads) {
  EnsembleState ensemble = build_ensemble(config.profile, config.zeeman, config.rates);
  const Schedule schedule = compile(config.sequence, config.compile);

  Simulation sim;
  sim.diagnostics = ensemble.diagnostics;
  sim.sweep_count = schedule.sweep_count;
  const ReadoutPulse scan = first_readout(config.sequence);
  sim.baseline = readout_scan(ensemble, scan.f_start_MHz, scan.f_stop_MHz, scan.n_points);

  RunOptions options;
  options.laser_linewidth_MHz = config.laser_linewidth_MHz;
  options.laser_lineshape = config.laser_lineshape;
  options.threads = threads;
  options.trace_window = config.outputs.trace_window;
  sim.run = run(ensemble, schedule, options);
  return sim;
}

double observable_value(const ExperimentConfig& config, const Simulation& sim, Observable which) {
  if (sim.run.spectra.empty()) throw Error("observable needs at least one readout");
  if (which == Observable::kHoleArea) return sim.run.trace.back().hole_area;
  if (!config.outputs.metrics_window) {
    throw Error("observable " + to_string(which) + " needs outputs.metrics_window");
  }
  const auto& snap = sim.run.spectra.back();
  const ResidualMetrics m = residual_metrics(snap.baseline, snap.spectrum, *config.outputs.metrics_window);
  switch (which) {
    case Observable::kRho1Res:
      return m.rho1_res;
    case Observable::kRemainingTotalFraction:
      return m.remaining_total_fraction;
    case Observable::kSpinPolarization:
      return m.spin_polarization;
    case Observable::kHoleArea:
      break;
  }
  return m.rho1_res;
}

ExperimentConfig with_value(const ExperimentConfig& config, const std::string& pointer, double value) {
  json j = detail::to_json(config);
  j.erase("scan");
  try {
    const json::json_pointer ptr(pointer);
    if (value == std::floor(value) && std::abs(value) < 1e15) {
      j[ptr] = static_cast<std::int64_t>(value);
    } else {
      j[ptr] = value;
    }
  } catch (const json::exception& e) {
    throw Error("scan path '" + pointer + "': " + e.what());
  }
  ExperimentConfig out = parse_config(j.dump());
  out.scan = config.scan;
  return out;
}

ScanResult run_scan(const ExperimentConfig& config, unsigned threads) {
  if (!config.scan) throw Error("configuration has no scan section");
  const ScanConfig& scan = *config.scan;
  const ScanAxis& inner = scan.axes.back();
  const ScanAxis* outer = scan.axes.size() == 2 ? &scan.axes.front() : nullptr;
  const std::vector<double> outer_values = outer ? outer->values : std::vector<double>{0.0};

  ScanResult result;
  std::vector<double> followup_y;
  for (double ov : outer_values) {
    const ExperimentConfig base = outer ? with_value(config, outer->path, outer->offset + ov) : config;
    std::vector<double> ys;
    for (double iv : inner.values) {
      const ExperimentConfig point = with_value(base, inner.path, inner.offset + iv);
      const Simulation sim = simulate(point, threads);
      ys.push_back(observable_value(point, sim, scan.observable));
    }
    if (scan.normalize_first) {
      if (ys.front() == 0.0) throw Error("scan normalization: first value is zero");
      const double first = ys.front();
      for (auto& y : ys) y /= first;
    }
    for (std::size_t i = 0; i < ys.size(); ++i) {
      ScanPoint p;
      if (outer) p.coords.push_back(ov);
      p.coords.push_back(inner.values[i]);
      p.value = ys[i];
      result.points.push_back(p);
    }
    if (scan.fit_model) {
      result.fits.push_back(fit_by_name(*scan.fit_model, XYData{inner.values, ys}));
      if (scan.followup_parameter) {
        followup_y.push_back(result.fits.back().value(*scan.followup_parameter));
      }
    }
  }
  if (scan.followup_parameter) result.followup = fit_linear(XYData{outer_values, followup_y});
  return result;
}

ScenarioReport run_scenario(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                            unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  ScenarioReport report;
  const auto& outputs = config.outputs;
  json manifest;
  manifest["name"] = config.name;
  manifest["version"] = kVersion;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["config_hash"] = "fnv1a64:" + hex64(config_hash(config));
  manifest["seed"] = config.seed;

  auto write = [&](const std::string& name, auto&& body) {
    const auto path = out_dir / name;
    auto out = open_output(path);
    body(out);
    finish_output(out, path);
    report.files.push_back(path);
  };

  if (config.scan) {
    const ScanResult scan = run_scan(config, threads);
    write(config.scan->file, [&](std::ostream& out) {
      for (const auto& axis : config.scan->axes) out << axis.name << ',';
      out << to_string(config.scan->observable) << '\n';
      for (const auto& p : scan.points) {
        for (double c : p.coords) out << csv::format_number(c) << ',';
        out << csv::format_number(p.value) << '\n';
      }
    });
    if (!scan.fits.empty()) {
      json fits = json::array();
      for (const auto& f : scan.fits) fits.push_back(detail::to_json(f));
      json doc = {{"fits", fits}};
      if (scan.followup) {
        doc["followup"] = {{"parameter", *config.scan->followup_parameter},
                           {"slope", scan.followup->slope},
                           {"intercept", scan.followup->intercept},
                           {"r_squared", scan.followup->r_squared}};
      }
      write(config.scan->fits_file, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    }
    report.scan = scan;
  } else {
    Simulation sim = simulate(config, threads);
    manifest["sweep_count"] = sim.sweep_count;
    manifest["diagnostics"] = sim.diagnostics;
    if (outputs.spectra) {
      write(outputs.baseline_file, [&](std::ostream& out) { write_spectrum_csv(out, sim.baseline); });
      for (std::size_t k = 0; k < sim.run.spectra.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "_%03zu.csv", k);
        write(outputs.spectra_prefix + name,
              [&](std::ostream& out) { write_spectrum_csv(out, sim.run.spectra[k].spectrum); });
      }
    }
    if (!sim.run.trace.empty()) {
      std::vector<TracePoint> trace = sim.run.trace;
      if (outputs.trace_noise_sigma > 0.0) {
        std::vector<double> areas;
        for (const auto& p : trace) areas.push_back(p.hole_area);
        areas = add_gaussian_noise(areas, outputs.trace_noise_sigma, config.seed);
        for (std::size_t i = 0; i < trace.size(); ++i) trace[i].hole_area = areas[i];
      }
      write(outputs.trace_file, [&](std::ostream& out) { write_trace_csv(out, trace); });

      if (outputs.fit_model) {
        XYData data;
        for (const auto& p : trace) {
          data.x.push_back(p.delay_ms);
          data.y.push_back(p.hole_area);
        }
        const FitResult fit = fit_by_name(*outputs.fit_model, data);
        write(outputs.fit_file, [&](std::ostream& out) { out << fit_result_json(fit) << '\n'; });
      }
      if (outputs.metrics_window) {
        json rows = json::array();
        for (const auto& snap : sim.run.spectra) {
          json row = metrics_json(residual_metrics(snap.baseline, snap.spectrum, *outputs.metrics_window));
          row["time_ms"] = snap.time_ms;
          row["delay_ms"] = snap.delay_ms;
          rows.push_back(row);
        }
        write(outputs.metrics_file, [&](std::ostream& out) { out << rows.dump(2) << '\n'; });
      }
    }
    report.simulation = std::move(sim);
  }

  json files = json::array();
  for (const auto& f : report.files) files.push_back(f.filename().string());
  manifest["outputs"] = files;
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write(outputs.manifest_file, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  return report;
}

}  // namespace shb
