#pragma once

// Config-driven experiment execution, parameter scans and the bundled presets.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shb/analysis.hpp"
#include "shb/config.hpp"
#include "shb/sequence.hpp"

namespace shb {

inline constexpr const char* kVersion = "0.1.0";

struct Simulation {
  Spectrum baseline;  // scan of the unpumped ensemble
  RunResult run;
  std::uint64_t sweep_count = 0;
  std::vector<std::string> diagnostics;
};

/// Builds the ensemble, compiles the sequence and executes it.
Simulation simulate(const ExperimentConfig& config, unsigned threads = 1);

/// Scalar summary of the last readout of a simulation.
double observable_value(const ExperimentConfig& config, const Simulation& sim, Observable which);

/// Copy of `config` with `value` written at a JSON pointer.
ExperimentConfig with_value(const ExperimentConfig& config, const std::string& pointer, double value);

struct ScanPoint {
  std::vector<double> coords;  // one entry per axis, outer first
  double value = 0.0;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  std::vector<FitResult> fits;  // one per outer value (or a single one)
  std::optional<LinearFit> followup;
};

ScanResult run_scan(const ExperimentConfig& config, unsigned threads = 1);

struct ScenarioReport {
  std::vector<std::filesystem::path> files;
  std::optional<Simulation> simulation;
  std::optional<ScanResult> scan;
};

/// Runs a configuration and writes its artifacts plus a JSON manifest into
/// `out_dir` (created if missing).
ScenarioReport run_scenario(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                            unsigned threads = 1);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
std::string preset_text(const std::string& name);
ExperimentConfig preset(const std::string& name);

}  // namespace shb
