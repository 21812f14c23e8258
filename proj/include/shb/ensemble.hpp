#pragma once

// Inhomogeneously broadened ensemble of ion classes and its optical readout.

#include <iosfwd>
#include <string>
#include <vector>

#include "shb/engine.hpp"
#include "shb/levels.hpp"

namespace shb {

enum class ProfileShape { kGaussian, kLorentzian, kFlat };

std::string to_string(ProfileShape shape);
ProfileShape profile_shape_from_string(const std::string& name);

struct InhomogeneousProfile {
  double center_MHz = 0.0;
  double fwhm_MHz = 2000.0;
  ProfileShape shape = ProfileShape::kGaussian;
  double grid_span_MHz = 500.0;
  double grid_step_MHz = 0.25;
  // Unpumped optical depth at the line center; fixes the cross-section scale.
  double alpha_l0 = 1.0;
  // Width of the per-transition readout lineshape (laser-jitter limited).
  double line_fwhm_MHz = 1.0;

  bool valid() const {
    return grid_step_MHz > 0.0 && grid_span_MHz >= 10.0 * grid_step_MHz &&
           fwhm_MHz > 0.0 && alpha_l0 > 0.0 && line_fwhm_MHz > 0.0;
  }

  bool operator==(const InhomogeneousProfile&) const = default;
};

struct IonClass {
  double center_MHz = 0.0;  // transition-1 frequency
  double weight = 0.0;
  IonClassState state;
};

struct EnsembleState {
  std::vector<IonClass> classes;
  ZeemanConfig config;
  RateParams params;  // sigma_scale calibrated at build time
  double line_fwhm_MHz = 1.0;
  std::vector<std::string> diagnostics;

  double total_population() const;
};

struct Spectrum {
  std::vector<double> freqs_MHz;
  std::vector<double> optical_depth;
  std::vector<double> transmission;

  std::size_t size() const { return freqs_MHz.size(); }
};

struct FrequencyWindow {
  double lo_MHz = 0.0;
  double hi_MHz = 0.0;

  bool contains(double f) const { return f >= lo_MHz && f <= hi_MHz; }

  bool operator==(const FrequencyWindow&) const = default;
};

enum class FeatureKind { kHole, kAntihole };

struct SpectralFeature {
  double freq_MHz = 0.0;
  FeatureKind kind = FeatureKind::kHole;
  bool overlapping = false;  // coincides with a feature of the opposite kind
};

/// Relative class weight of a profile at offset `detuning` from its center.
double profile_weight(const InhomogeneousProfile& profile, double detuning_MHz);

EnsembleState build_ensemble(const InhomogeneousProfile& profile,
                             const ZeemanConfig& config, RateParams params);

/// Resets every class to the thermal ground doublet.
void reset_thermal(EnsembleState& ensemble);

double absorbance(const EnsembleState& ensemble, double probe_freq_MHz);

Spectrum readout_scan(const EnsembleState& ensemble, double f_start_MHz,
                      double f_stop_MHz, std::size_t n_points);

/// Trapezoidal area of (baseline - current) optical depth inside `window`.
double hole_area(const Spectrum& spectrum, const Spectrum& baseline,
                 const FrequencyWindow& window);

/// Trapezoidal integral of optical depth over the whole scan.
double integrated_optical_depth(const Spectrum& spectrum);

std::vector<SpectralFeature> predicted_features(double pump_freq_MHz,
                                                const ZeemanConfig& config);

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);
Spectrum read_spectrum_csv(std::istream& in);

}  // namespace shb
