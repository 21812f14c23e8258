#include "shb/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "shb/csv.hpp"

namespace shb {

namespace {

// Optical depth contributed by one class at one probe frequency, before the
// cross-section scale is applied.
double class_absorbance(const IonClass& c, const TransitionSet& lines,
                        double probe, double line_fwhm) {
  const auto& s = c.state.levels;
  double od = 0.0;
  for (Transition t : kAllTransitions) {
    const double diff = s[ground_of(t)] - s[kE1 + excited_of(t)];
    od += diff * lorentzian(probe - lines[t], line_fwhm);
  }
  return c.weight * od;
}

double raw_absorbance(const EnsembleState& ensemble, double probe) {
  double od = 0.0;
  for (const auto& c : ensemble.classes) {
    od += class_absorbance(c, transition_set(c.center_MHz, ensemble.config),
                           probe, ensemble.line_fwhm_MHz);
  }
  return od;
}

}  // namespace

std::string to_string(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::kGaussian:
      return "gaussian";
    case ProfileShape::kLorentzian:
      return "lorentzian";
    case ProfileShape::kFlat:
      return "flat";
  }
  return "gaussian";
}

ProfileShape profile_shape_from_string(const std::string& name) {
  if (name == "gaussian") return ProfileShape::kGaussian;
  if (name == "lorentzian") return ProfileShape::kLorentzian;
  if (name == "flat") return ProfileShape::kFlat;
  throw Error("unknown profile shape '" + name + "'");
}

double EnsembleState::total_population() const {
  double total = 0.0;
  for (const auto& c : classes) total += c.weight * c.state.total();
  return total;
}

double profile_weight(const InhomogeneousProfile& profile, double detuning_MHz) {
  switch (profile.shape) {
    case ProfileShape::kGaussian: {
      const double x = detuning_MHz / profile.fwhm_MHz;
      return std::exp(-4.0 * std::log(2.0) * x * x);
    }
    case ProfileShape::kLorentzian:
      return lorentzian(detuning_MHz, profile.fwhm_MHz);
    case ProfileShape::kFlat:
      return 1.0;
  }
  return 1.0;
}

EnsembleState build_ensemble(const InhomogeneousProfile& profile,
                             const ZeemanConfig& config, RateParams params) {
  if (!profile.valid()) throw Error("build_ensemble: invalid profile");
  if (!config.valid()) throw Error("build_ensemble: invalid Zeeman config");
  if (!params.valid()) throw Error("build_ensemble: invalid rate parameters");

  EnsembleState ensemble;
  ensemble.config = config;
  ensemble.line_fwhm_MHz = profile.line_fwhm_MHz;

  const auto half = static_cast<long>(
      std::floor(0.5 * profile.grid_span_MHz / profile.grid_step_MHz + 1e-9));
  ensemble.classes.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long k = -half; k <= half; ++k) {
    const double offset = static_cast<double>(k) * profile.grid_step_MHz;
    ensemble.classes.push_back(IonClass{profile.center_MHz + offset,
                                        profile_weight(profile, offset),
                                        IonClassState::thermal()});
  }

  params.sigma_scale = 1.0;
  ensemble.params = params;
  const double unit_od = raw_absorbance(ensemble, profile.center_MHz);
  ensemble.params.sigma_scale = profile.alpha_l0 / unit_od;

  const double de = excited_splitting(config);
  if (de > 0.0 && profile.grid_step_MHz > de / 4.0) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "grid step %.4g MHz is coarse relative to the excited "
                  "splitting %.4g MHz (want <= %.4g)",
                  profile.grid_step_MHz, de, de / 4.0);
    ensemble.diagnostics.emplace_back(msg);
  }
  return ensemble;
}

void reset_thermal(EnsembleState& ensemble) {
  for (auto& c : ensemble.classes) c.state = IonClassState::thermal();
}

double absorbance(const EnsembleState& ensemble, double probe_freq_MHz) {
  return ensemble.params.sigma_scale * raw_absorbance(ensemble, probe_freq_MHz);
}

Spectrum readout_scan(const EnsembleState& ensemble, double f_start_MHz,
                      double f_stop_MHz, std::size_t n_points) {
  if (!(f_start_MHz < f_stop_MHz) || n_points < 2) {
    throw Error("readout_scan: need f_start < f_stop and at least 2 points");
  }
  Spectrum spectrum;
  spectrum.freqs_MHz.resize(n_points);
  spectrum.optical_depth.assign(n_points, 0.0);
  spectrum.transmission.resize(n_points);
  const double step = (f_stop_MHz - f_start_MHz) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    spectrum.freqs_MHz[i] = f_start_MHz + step * static_cast<double>(i);
  }
  spectrum.freqs_MHz.back() = f_stop_MHz;

  // Class-major loop keeps the transition set computation out of the inner loop.
  for (const auto& c : ensemble.classes) {
    const TransitionSet lines = transition_set(c.center_MHz, ensemble.config);
    for (std::size_t i = 0; i < n_points; ++i) {
      spectrum.optical_depth[i] +=
          class_absorbance(c, lines, spectrum.freqs_MHz[i], ensemble.line_fwhm_MHz);
    }
  }
  for (std::size_t i = 0; i < n_points; ++i) {
    spectrum.optical_depth[i] *= ensemble.params.sigma_scale;
    spectrum.transmission[i] = std::exp(-spectrum.optical_depth[i]);
  }
  return spectrum;
}

double hole_area(const Spectrum& spectrum, const Spectrum& baseline,
                 const FrequencyWindow& window) {
  if (spectrum.size() != baseline.size()) {
    throw Error("hole_area: spectra have different grids");
  }
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (spectrum.freqs_MHz[i] != baseline.freqs_MHz[i]) {
      throw Error("hole_area: spectra have different grids");
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    const double f0 = spectrum.freqs_MHz[i - 1];
    const double f1 = spectrum.freqs_MHz[i];
    if (!window.contains(f0) || !window.contains(f1)) continue;
    const double d0 = baseline.optical_depth[i - 1] - spectrum.optical_depth[i - 1];
    const double d1 = baseline.optical_depth[i] - spectrum.optical_depth[i];
    area += 0.5 * (d0 + d1) * (f1 - f0);
  }
  return area;
}

double integrated_optical_depth(const Spectrum& spectrum) {
  double total = 0.0;
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    total += 0.5 * (spectrum.optical_depth[i - 1] + spectrum.optical_depth[i]) *
             (spectrum.freqs_MHz[i] - spectrum.freqs_MHz[i - 1]);
  }
  return total;
}

std::vector<SpectralFeature> predicted_features(double pump_freq_MHz,
                                                const ZeemanConfig& config) {
  const TransitionSet lines = transition_set(pump_freq_MHz, config);
  std::vector<SpectralFeature> features = {
      {lines[Transition::kG1E1], FeatureKind::kHole, false},
      {lines[Transition::kG1E2], FeatureKind::kHole, false},
      {lines[Transition::kG2E1], FeatureKind::kAntihole, false},
      {lines[Transition::kG2E2], FeatureKind::kAntihole, false},
  };
  constexpr double kSame = 1e-9;
  for (auto& a : features) {
    for (const auto& b : features) {
      if (a.kind != b.kind && std::abs(a.freq_MHz - b.freq_MHz) < kSame) {
        a.overlapping = true;
      }
    }
  }
  return features;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "freq_MHz,optical_depth,transmission\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out << csv::format_number(spectrum.freqs_MHz[i]) << ','
        << csv::format_number(spectrum.optical_depth[i]) << ','
        << csv::format_number(spectrum.transmission[i]) << '\n';
  }
}

Spectrum read_spectrum_csv(std::istream& in) {
  const auto table = csv::read_numeric(in, 3);
  Spectrum spectrum;
  for (const auto& row : table) {
    spectrum.freqs_MHz.push_back(row[0]);
    spectrum.optical_depth.push_back(row[1]);
    spectrum.transmission.push_back(row[2]);
  }
  return spectrum;
}

}  // namespace shb
