#include <map>

#include "shb/scenario.hpp"

namespace shb {

namespace {

struct PresetEntry {
  const char* description;
  const char* text;
};

// Knobs marked by the calibration tests: pump power_rate and beta_z2 of the
// stimulated presets, the RF coupling, and the fig7 gate gap.
const std::map<std::string, PresetEntry>& registry() {
  static const std::map<std::string, PresetEntry> presets = {
      {"fig3_standard_pumping",
       {"Narrow 200 ms pump without stimulation; hole area versus readout delay "
        "with a double-exponential fit.",
        R"({
  "name": "fig3_standard_pumping",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 130, "beta": 0.9},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.25},
  "sequence": {
    "pulses": [
      {"type": "pump", "center_MHz": 0, "power_rate": 1.0, "duration_ms": 200},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 1},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 2},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 4},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 6},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 10},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 15},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 20},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 30},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 40},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 60},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 80},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 100},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 150},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 200},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 250},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 300}
    ]
  },
  "outputs": {"fit": "doubleexp"}
})"}},
      {"fig4_stimulation_spectrum",
       {"Hot crystal: hole area after a short stimulation tail versus stimulation "
        "laser detuning, with a Lorentzian fit of the 14 GHz response.",
        R"({
  "name": "fig4_stimulation_spectrum",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 2, "beta": 0.9},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.5},
  "calibration": {"stim_slope_per_mW_ms": 0.35},
  "sequence": {
    "pulses": [
      {"type": "pump", "center_MHz": 0, "power_rate": 1.0, "duration_ms": 100},
      {"type": "stimulation", "start_ms": 100, "power_mW": 2, "duration_ms": 0.02,
       "detuning_MHz": 0, "response_fwhm_MHz": 14000},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 0.1}
    ]
  },
  "outputs": {},
  "scan": {
    "axes": [{"name": "detuning_MHz", "path": "/sequence/pulses/1/detuning_MHz",
              "values": [-40000, -36000, -32000, -28000, -24000, -20000, -16000, -12000, -8000, -4000, 0,
                         4000, 8000, 12000, 16000, 20000, 24000, 28000, 32000, 36000, 40000]}],
    "observable": "hole_area",
    "fit": "lorentzian"
  }
})"}},
      {"fig5_stimulation_rate",
       {"Hot crystal with persistent holes: normalized hole area versus stimulation "
        "overhang at 5, 10 and 20 mW; exponential fits and a linear fit of the rates.",
        R"({
  "name": "fig5_stimulation_rate",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 2, "beta": 0.9, "persistent_fraction": 0.1},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.5},
  "calibration": {"stim_slope_per_mW_ms": 0.35},
  "sequence": {
    "pulses": [
      {"type": "pump", "center_MHz": 0, "power_rate": 1.0, "duration_ms": 100},
      {"type": "stimulation", "start_ms": 0, "power_mW": 20, "duration_ms": 100},
      {"type": "readout", "f_start_MHz": -350, "f_stop_MHz": 350, "n_points": 1401, "at_delay_ms": 0.1}
    ]
  },
  "outputs": {},
  "scan": {
    "axes": [
      {"name": "power_mW", "path": "/sequence/pulses/1/power_mW", "values": [5, 10, 20]},
      {"name": "tau_ms", "path": "/sequence/pulses/1/duration_ms", "offset": 100,
       "values": [0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1, 1.25, 1.5, 2, 2.5, 3, 4, 5]}
    ],
    "observable": "hole_area",
    "normalize_first": true,
    "fit": "expoffset",
    "followup": "rate"
  }
})"}},
      {"stimulated_pumping",
       {"10 MHz swept pit pumped for 200 ms with the stimulation laser on for "
        "a further 1 ms; residual absorption read out 2.8 ms later.",
        R"({
  "name": "stimulated_pumping",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 130, "beta": 0.9, "beta_z2": 0.88},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.25},
  "calibration": {"stim_slope_per_mW_ms": 0.35, "rf_coupling_per_V2_ms": 0.5},
  "sequence": {
    "pulses": [
      {"type": "pump", "start_ms": 0, "center_MHz": 0, "sweep_span_MHz": 10, "sweep_period_ms": 0.1,
       "power_rate": 1.07, "duration_ms": 200},
      {"type": "stimulation", "start_ms": 0, "power_mW": 20, "duration_ms": 201},
      {"type": "readout", "f_start_MHz": -30, "f_stop_MHz": 30, "n_points": 241, "at_delay_ms": 2.8}
    ]
  },
  "outputs": {"metrics_window": [-2.5, 2.5]}
})"}},
      {"fig6_rf_power",
       {"Stimulated pumping of the 10 MHz pit plus an RF sweep of the excited "
        "Zeeman transition; remaining fraction versus RF voltage.",
        R"({
  "name": "fig6_rf_power",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 130, "beta": 0.9, "beta_z2": 0.88},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.25},
  "calibration": {"stim_slope_per_mW_ms": 0.35, "rf_coupling_per_V2_ms": 0.5},
  "sequence": {
    "pulses": [
      {"type": "pump", "start_ms": 0, "center_MHz": 0, "sweep_span_MHz": 10, "sweep_period_ms": 0.1,
       "power_rate": 1.07, "duration_ms": 200},
      {"type": "stimulation", "start_ms": 0, "power_mW": 20, "duration_ms": 201},
      {"type": "rf", "start_ms": 0, "center_MHz": 135, "bandwidth_MHz": 15, "sweep_period_ms": 0.001,
       "voltage_Vpp": 10, "duration_ms": 201},
      {"type": "readout", "f_start_MHz": -30, "f_stop_MHz": 30, "n_points": 241, "at_delay_ms": 2.8}
    ]
  },
  "outputs": {"metrics_window": [-2.5, 2.5]},
  "scan": {
    "axes": [{"name": "voltage_Vpp", "path": "/sequence/pulses/2/voltage_Vpp",
              "values": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]}],
    "observable": "remaining_total_fraction"
  }
})"}},
      {"fig7_tailoring",
       {"50 MHz pit burnt by 2000 gated sweeps with stimulation and RF, leaving a "
        "narrow absorption line at the center.",
        R"({
  "name": "fig7_tailoring",
  "zeeman": {"field_mT": 1.2, "theta_deg": 135, "g_ground": 12, "g_excited": 8},
  "rates": {"t1_ms": 11, "tz_ms": 130, "beta": 0.9, "beta_z2": 0.88},
  "profile": {"grid_span_MHz": 500, "grid_step_MHz": 0.25},
  "calibration": {"stim_slope_per_mW_ms": 0.35, "rf_coupling_per_V2_ms": 0.5},
  "laser": {"linewidth_MHz": 1, "lineshape": "gaussian"},
  "sequence": {
    "dt_max_ms": 0.0005,
    "pulses": [
      {"type": "pump", "start_ms": 0, "center_MHz": 0, "sweep_span_MHz": 50, "sweep_period_ms": 0.1,
       "gate_gap_MHz": 3, "power_rate": 10.0, "duration_ms": 200},
      {"type": "stimulation", "start_ms": 0, "power_mW": 20, "duration_ms": 201},
      {"type": "rf", "start_ms": 0, "center_MHz": 135, "bandwidth_MHz": 15, "sweep_period_ms": 0.001,
       "voltage_Vpp": 10, "duration_ms": 201},
      {"type": "readout", "f_start_MHz": -40, "f_stop_MHz": 40, "n_points": 801, "at_delay_ms": 2.8}
    ]
  },
  "outputs": {"metrics_window": [10, 20]}
})"}},
  };
  return presets;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, entry] : registry()) out.push_back({name, entry.description});
  return out;
}

std::string preset_text(const std::string& name) {
  const auto& presets = registry();
  const auto it = presets.find(name);
  if (it == presets.end()) {
    std::string known;
    for (const auto& [n, _] : presets) known += (known.empty() ? "" : ", ") + n;
    throw Error("unknown preset '" + name + "' (available: " + known + ")");
  }
  return it->second.text;
}

ExperimentConfig preset(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace shb
