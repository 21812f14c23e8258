#pragma once

// Experiment configuration: a JSON document describing the crystal, the
// pulse sequence and the requested outputs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shb/analysis.hpp"
#include "shb/ensemble.hpp"
#include "shb/error.hpp"
#include "shb/sequence.hpp"

namespace shb {

/// Every problem found while parsing, as "path: message" strings.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

enum class Observable { kHoleArea, kRho1Res, kRemainingTotalFraction, kSpinPolarization };

std::string to_string(Observable o);

struct OutputConfig {
  bool spectra = true;
  std::string spectra_prefix = "spectrum";
  std::string baseline_file = "baseline.csv";
  std::string trace_file = "trace.csv";
  // Hole-area integration window; unset integrates each full readout scan.
  std::optional<FrequencyWindow> trace_window;
  // Standard deviation of Gaussian noise added to the written trace.
  double trace_noise_sigma = 0.0;
  std::optional<std::string> fit_model;
  std::string fit_file = "fit.json";
  std::optional<FrequencyWindow> metrics_window;
  std::string metrics_file = "metrics.json";
  std::string manifest_file = "manifest.json";

  bool operator==(const OutputConfig&) const = default;
};

/// One scan dimension. Each value v is written as `offset + v` at the JSON
/// pointer `path` inside the configuration before the run.
struct ScanAxis {
  std::string name;
  std::string path;
  std::vector<double> values;
  double offset = 0.0;

  bool operator==(const ScanAxis&) const = default;
};

struct ScanConfig {
  // One or two axes; the last one is the x axis of the per-sweep fit.
  std::vector<ScanAxis> axes;
  Observable observable = Observable::kHoleArea;
  std::optional<std::string> fit_model;
  // Divide each inner sweep by its first value before fitting.
  bool normalize_first = false;
  // Linear fit of this fitted parameter against the outer axis.
  std::optional<std::string> followup_parameter;
  std::string file = "scan.csv";
  std::string fits_file = "scan_fits.json";

  bool operator==(const ScanConfig&) const = default;
};

struct ExperimentConfig {
  std::string name;
  ZeemanConfig zeeman;
  RateParams rates;
  InhomogeneousProfile profile;
  double laser_linewidth_MHz = 1.0;
  // Pump laser line; Gaussian models slow frequency jitter without far wings.
  Lineshape laser_lineshape = Lineshape::kLorentzian;
  CompileOptions compile;
  std::vector<Pulse> sequence;
  OutputConfig outputs;
  std::optional<ScanConfig> scan;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys and violated invariants raise ConfigError.
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON text with every field explicit.
std::string serialize_config(const ExperimentConfig& config, int indent = 2);

/// FNV-1a 64-bit hash of the canonical compact serialization.
std::uint64_t config_hash(const ExperimentConfig& config);

/// JSON object with model, named parameters, standard errors and flags.
std::string fit_result_json(const FitResult& fit, int indent = 2);

FitResult fit_by_name(const std::string& model, const XYData& data);

}  // namespace shb
