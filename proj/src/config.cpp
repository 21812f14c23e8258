#include "shb/config.hpp"

#include <algorithm>
#include <set>

#include "json_internal.hpp"

namespace shb {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "invalid configuration:";
  for (const auto& i : issues) msg += "\n  " + i;
  return msg;
}

class Issues {
 public:
  void add(const std::string& path, const std::string& message) {
    list.push_back((path.empty() ? std::string("<root>") : path) + ": " + message);
  }
  std::vector<std::string> list;
};

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Reads the fields of one JSON object, remembering which keys were consumed
// so leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, Issues& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issues_.add(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const char* key) const { return child(path_, key); }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      issues_.add(path(key), "expected a number");
    }
  }

  void number(const char* key, std::optional<double>& out) {
    if (!has(key) || at(key).is_null()) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }

  template <typename Int>
  void integer(const char* key, Int& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      out = v.get<Int>();
    } else {
      issues_.add(path(key), "expected a non-negative integer");
    }
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_boolean()) {
      out = v.get<bool>();
    } else {
      issues_.add(path(key), "expected true or false");
    }
  }

  void string(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      issues_.add(path(key), "expected a string");
    }
  }

  void string(const char* key, std::optional<std::string>& out) {
    if (!has(key) || at(key).is_null()) return;
    std::string s;
    string(key, s);
    out = s;
  }

  void window(const char* key, std::optional<FrequencyWindow>& out) {
    if (!has(key) || at(key).is_null()) return;
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      issues_.add(path(key), "expected [lo_MHz, hi_MHz]");
      return;
    }
    const FrequencyWindow w{v[0].get<double>(), v[1].get<double>()};
    if (!(w.lo_MHz < w.hi_MHz)) issues_.add(path(key), "window needs lo < hi");
    out = w;
  }

  void finish() const {
    if (!j_.is_object()) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) issues_.add(child(path_, key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  Issues& issues_;
  std::set<std::string> seen_;
};

void check(Issues& issues, bool ok, const std::string& path, const std::string& message) {
  if (!ok) issues.add(path, message);
}

void read_zeeman(ObjectReader& r, ZeemanConfig& z, Issues& issues) {
  r.number("field_mT", z.field_mT);
  r.number("theta_deg", z.theta_deg);
  r.number("g_ground", z.g_ground);
  r.number("g_excited", z.g_excited);
  r.number("bohr_MHz_per_mT", z.bohr_MHz_per_mT);
  r.finish();
  check(issues, z.field_mT >= 0.0, r.path("field_mT"), "must be >= 0");
  check(issues, z.g_ground > 0.0, r.path("g_ground"), "must be > 0");
  check(issues, z.g_excited > 0.0, r.path("g_excited"), "must be > 0");
  check(issues, z.bohr_MHz_per_mT > 0.0, r.path("bohr_MHz_per_mT"), "must be > 0");
}

void read_rates(ObjectReader& r, RateParams& p, Issues& issues) {
  r.number("t1_ms", p.t1_ms);
  r.number("tz_ms", p.tz_ms);
  r.number("beta", p.beta);
  p.beta_z2 = p.beta;
  r.number("beta_z2", p.beta_z2);
  r.number("persistent_fraction", p.persistent_fraction);
  r.finish();
  check(issues, p.t1_ms > 0.0, r.path("t1_ms"), "must be > 0");
  check(issues, p.tz_ms > 0.0, r.path("tz_ms"), "must be > 0");
  check(issues, p.beta >= 0.0 && p.beta <= 1.0, r.path("beta"), "must lie in [0, 1]");
  check(issues, p.beta_z2 >= 0.0 && p.beta_z2 <= 1.0, r.path("beta_z2"), "must lie in [0, 1]");
  check(issues, p.persistent_fraction >= 0.0 && p.persistent_fraction < 1.0,
        r.path("persistent_fraction"), "must lie in [0, 1)");
}

void read_profile(ObjectReader& r, InhomogeneousProfile& p, Issues& issues) {
  r.number("center_MHz", p.center_MHz);
  r.number("fwhm_MHz", p.fwhm_MHz);
  if (r.has("shape")) {
    std::string shape;
    r.string("shape", shape);
    try {
      p.shape = profile_shape_from_string(shape);
    } catch (const Error& e) {
      issues.add(r.path("shape"), e.what());
    }
  }
  r.number("grid_span_MHz", p.grid_span_MHz);
  r.number("grid_step_MHz", p.grid_step_MHz);
  r.number("alpha_l0", p.alpha_l0);
  r.number("line_fwhm_MHz", p.line_fwhm_MHz);
  r.finish();
  check(issues, p.fwhm_MHz > 0.0, r.path("fwhm_MHz"), "must be > 0");
  check(issues, p.grid_step_MHz > 0.0, r.path("grid_step_MHz"), "must be > 0");
  check(issues, p.grid_span_MHz >= 10.0 * p.grid_step_MHz, r.path("grid_span_MHz"),
        "must be at least 10 grid steps");
  check(issues, p.alpha_l0 > 0.0, r.path("alpha_l0"), "must be > 0");
  check(issues, p.line_fwhm_MHz > 0.0, r.path("line_fwhm_MHz"), "must be > 0");
}

void check_start(Issues& issues, const ObjectReader& r, const std::optional<double>& start) {
  check(issues, !start || *start >= 0.0, r.path("start_ms"), "must be >= 0");
}

Pulse read_pulse(ObjectReader& r, Issues& issues) {
  std::string type;
  if (!r.has("type")) {
    issues.add(r.path("type"), "missing pulse type");
  } else {
    r.string("type", type);
  }
  if (type == "pump") {
    PumpPulse p;
    r.number("start_ms", p.start_ms);
    r.number("center_MHz", p.center_MHz);
    r.number("sweep_span_MHz", p.sweep_span_MHz);
    r.number("sweep_period_ms", p.sweep_period_ms);
    r.number("gate_gap_MHz", p.gate_gap_MHz);
    r.number("power_rate", p.power_rate);
    r.number("duration_ms", p.duration_ms);
    r.finish();
    check_start(issues, r, p.start_ms);
    check(issues, p.duration_ms >= 0.0, r.path("duration_ms"), "must be >= 0");
    check(issues, p.sweep_span_MHz >= 0.0, r.path("sweep_span_MHz"), "must be >= 0");
    check(issues, p.sweep_span_MHz == 0.0 || p.sweep_period_ms > 0.0, r.path("sweep_period_ms"),
          "must be > 0 for a swept pump");
    check(issues, p.gate_gap_MHz >= 0.0 && (p.gate_gap_MHz == 0.0 || p.gate_gap_MHz < p.sweep_span_MHz),
          r.path("gate_gap_MHz"), "must lie in [0, sweep_span_MHz)");
    check(issues, p.power_rate >= 0.0, r.path("power_rate"), "must be >= 0");
    return p;
  }
  if (type == "stimulation") {
    StimulationPulse p;
    r.number("start_ms", p.start_ms);
    r.number("power_mW", p.power_mW);
    r.number("duration_ms", p.duration_ms);
    r.number("detuning_MHz", p.detuning_MHz);
    r.number("response_fwhm_MHz", p.response_fwhm_MHz);
    r.finish();
    check_start(issues, r, p.start_ms);
    check(issues, p.duration_ms >= 0.0, r.path("duration_ms"), "must be >= 0");
    check(issues, p.power_mW >= 0.0, r.path("power_mW"), "must be >= 0");
    check(issues, p.response_fwhm_MHz > 0.0, r.path("response_fwhm_MHz"), "must be > 0");
    return p;
  }
  if (type == "rf") {
    RfPulse p;
    r.number("start_ms", p.start_ms);
    r.number("center_MHz", p.center_MHz);
    r.number("bandwidth_MHz", p.bandwidth_MHz);
    r.number("sweep_period_ms", p.sweep_period_ms);
    r.number("voltage_Vpp", p.voltage_Vpp);
    r.number("duration_ms", p.duration_ms);
    r.number("edge_MHz", p.edge_MHz);
    r.finish();
    check_start(issues, r, p.start_ms);
    check(issues, p.duration_ms >= 0.0, r.path("duration_ms"), "must be >= 0");
    check(issues, p.bandwidth_MHz >= 0.0, r.path("bandwidth_MHz"), "must be >= 0");
    check(issues, p.sweep_period_ms > 0.0, r.path("sweep_period_ms"), "must be > 0");
    check(issues, p.edge_MHz >= 0.0, r.path("edge_MHz"), "must be >= 0");
    return p;
  }
  if (type == "wait") {
    WaitPulse p;
    r.number("duration_ms", p.duration_ms);
    r.finish();
    check(issues, p.duration_ms >= 0.0, r.path("duration_ms"), "must be >= 0");
    return p;
  }
  if (type == "readout") {
    ReadoutPulse p;
    r.number("f_start_MHz", p.f_start_MHz);
    r.number("f_stop_MHz", p.f_stop_MHz);
    r.integer("n_points", p.n_points);
    r.number("at_delay_ms", p.at_delay_ms);
    r.finish();
    check(issues, p.f_start_MHz < p.f_stop_MHz, r.path("f_stop_MHz"), "must exceed f_start_MHz");
    check(issues, p.n_points >= 2, r.path("n_points"), "must be >= 2");
    check(issues, p.at_delay_ms >= 0.0, r.path("at_delay_ms"), "must be >= 0");
    return p;
  }
  if (!type.empty()) {
    issues.add(r.path("type"), "unknown pulse type '" + type +
                                   "' (expected pump, stimulation, rf, wait or readout)");
  }
  return WaitPulse{};
}

void read_sequence(ObjectReader& r, ExperimentConfig& c, Issues& issues) {
  r.number("dt_max_ms", c.compile.dt_max_ms);
  check(issues, !c.compile.dt_max_ms || *c.compile.dt_max_ms > 0.0, r.path("dt_max_ms"),
        "must be > 0");
  if (r.has("pulses")) {
    const json& list = r.at("pulses");
    const std::string base = r.path("pulses");
    if (!list.is_array()) {
      issues.add(base, "expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        ObjectReader pr(list[i], element(base, i), issues);
        if (list[i].is_object()) c.sequence.push_back(read_pulse(pr, issues));
      }
    }
  }
  r.finish();
}

const char* kFitModels[] = {"doubleexp", "lorentzian", "linear", "expoffset"};

bool known_model(const std::string& m) {
  for (const char* k : kFitModels) {
    if (m == k) return true;
  }
  return false;
}

void read_outputs(ObjectReader& r, OutputConfig& o, Issues& issues) {
  r.boolean("spectra", o.spectra);
  r.string("spectra_prefix", o.spectra_prefix);
  r.string("baseline_file", o.baseline_file);
  r.string("trace_file", o.trace_file);
  r.window("trace_window", o.trace_window);
  r.number("trace_noise_sigma", o.trace_noise_sigma);
  r.string("fit", o.fit_model);
  r.string("fit_file", o.fit_file);
  r.window("metrics_window", o.metrics_window);
  r.string("metrics_file", o.metrics_file);
  r.string("manifest_file", o.manifest_file);
  r.finish();
  check(issues, o.trace_noise_sigma >= 0.0, r.path("trace_noise_sigma"), "must be >= 0");
  check(issues, !o.fit_model || known_model(*o.fit_model), r.path("fit"),
        "unknown fit model (expected doubleexp, lorentzian, linear or expoffset)");
}

Observable observable_from_string(const std::string& s, bool& ok) {
  ok = true;
  if (s == "hole_area") return Observable::kHoleArea;
  if (s == "rho1_res") return Observable::kRho1Res;
  if (s == "remaining_total_fraction") return Observable::kRemainingTotalFraction;
  if (s == "spin_polarization") return Observable::kSpinPolarization;
  ok = false;
  return Observable::kHoleArea;
}

void read_scan(ObjectReader& r, ScanConfig& s, Issues& issues) {
  if (r.has("axes")) {
    const json& list = r.at("axes");
    const std::string base = r.path("axes");
    if (!list.is_array()) {
      issues.add(base, "expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        ObjectReader ar(list[i], element(base, i), issues);
        ScanAxis axis;
        ar.string("name", axis.name);
        ar.string("path", axis.path);
        ar.number("offset", axis.offset);
        if (ar.has("values")) {
          const json& v = ar.at("values");
          if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
            axis.values = v.get<std::vector<double>>();
          } else {
            issues.add(ar.path("values"), "expected an array of numbers");
          }
        }
        ar.finish();
        check(issues, !axis.values.empty(), ar.path("values"), "must not be empty");
        check(issues, !axis.path.empty() && axis.path[0] == '/', ar.path("path"),
              "must be a JSON pointer such as /sequence/pulses/0/duration_ms");
        s.axes.push_back(axis);
      }
    }
  }
  check(issues, !s.axes.empty() && s.axes.size() <= 2, r.path("axes"), "need one or two axes");
  if (r.has("observable")) {
    std::string name;
    r.string("observable", name);
    bool ok = false;
    s.observable = observable_from_string(name, ok);
    check(issues, ok, r.path("observable"),
          "expected hole_area, rho1_res, remaining_total_fraction or spin_polarization");
  }
  r.string("fit", s.fit_model);
  r.boolean("normalize_first", s.normalize_first);
  r.string("followup", s.followup_parameter);
  r.string("file", s.file);
  r.string("fits_file", s.fits_file);
  r.finish();
  check(issues, !s.fit_model || known_model(*s.fit_model), r.path("fit"), "unknown fit model");
  check(issues, !s.followup_parameter || (s.fit_model && s.axes.size() == 2), r.path("followup"),
        "needs a fit and two axes");
}

void check_distinct_outputs(const ExperimentConfig& c, Issues& issues) {
  std::vector<std::pair<std::string, std::string>> files = {
      {"outputs.baseline_file", c.outputs.baseline_file},
      {"outputs.trace_file", c.outputs.trace_file},
      {"outputs.fit_file", c.outputs.fit_file},
      {"outputs.metrics_file", c.outputs.metrics_file},
      {"outputs.manifest_file", c.outputs.manifest_file}};
  if (c.scan) {
    files.push_back({"scan.file", c.scan->file});
    files.push_back({"scan.fits_file", c.scan->fits_file});
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (files[i].second.empty()) issues.add(files[i].first, "must not be empty");
    if (files[i].second.find('/') != std::string::npos) {
      issues.add(files[i].first, "must be a plain file name");
    }
    if (files[i].second.rfind(c.outputs.spectra_prefix + "_", 0) == 0) {
      issues.add(files[i].first, "collides with the spectra prefix");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (files[i].second == files[j].second) {
        issues.add(files[i].first, "same file as " + files[j].first);
      }
    }
  }
}

json window_json(const std::optional<FrequencyWindow>& w) {
  if (!w) return nullptr;
  return json::array({w->lo_MHz, w->hi_MHz});
}

json pulse_json(const Pulse& pulse) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        json j;
        auto start = [&j](const std::optional<double>& s) {
          if (s) j["start_ms"] = *s;
        };
        if constexpr (std::is_same_v<T, PumpPulse>) {
          j["type"] = "pump";
          start(p.start_ms);
          j["center_MHz"] = p.center_MHz;
          j["sweep_span_MHz"] = p.sweep_span_MHz;
          j["sweep_period_ms"] = p.sweep_period_ms;
          j["gate_gap_MHz"] = p.gate_gap_MHz;
          j["power_rate"] = p.power_rate;
          j["duration_ms"] = p.duration_ms;
        } else if constexpr (std::is_same_v<T, StimulationPulse>) {
          j["type"] = "stimulation";
          start(p.start_ms);
          j["power_mW"] = p.power_mW;
          j["duration_ms"] = p.duration_ms;
          j["detuning_MHz"] = p.detuning_MHz;
          j["response_fwhm_MHz"] = p.response_fwhm_MHz;
        } else if constexpr (std::is_same_v<T, RfPulse>) {
          j["type"] = "rf";
          start(p.start_ms);
          j["center_MHz"] = p.center_MHz;
          j["bandwidth_MHz"] = p.bandwidth_MHz;
          j["sweep_period_ms"] = p.sweep_period_ms;
          j["voltage_Vpp"] = p.voltage_Vpp;
          j["duration_ms"] = p.duration_ms;
          j["edge_MHz"] = p.edge_MHz;
        } else if constexpr (std::is_same_v<T, WaitPulse>) {
          j["type"] = "wait";
          j["duration_ms"] = p.duration_ms;
        } else {
          j["type"] = "readout";
          j["f_start_MHz"] = p.f_start_MHz;
          j["f_stop_MHz"] = p.f_stop_MHz;
          j["n_points"] = p.n_points;
          j["at_delay_ms"] = p.at_delay_ms;
        }
        return j;
      },
      pulse);
}

}  // namespace

namespace detail {

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["zeeman"] = {{"field_mT", c.zeeman.field_mT},
                 {"theta_deg", c.zeeman.theta_deg},
                 {"g_ground", c.zeeman.g_ground},
                 {"g_excited", c.zeeman.g_excited},
                 {"bohr_MHz_per_mT", c.zeeman.bohr_MHz_per_mT}};
  j["rates"] = {{"t1_ms", c.rates.t1_ms},
                {"tz_ms", c.rates.tz_ms},
                {"beta", c.rates.beta},
                {"beta_z2", c.rates.beta_z2},
                {"persistent_fraction", c.rates.persistent_fraction}};
  j["profile"] = {{"center_MHz", c.profile.center_MHz},
                  {"fwhm_MHz", c.profile.fwhm_MHz},
                  {"shape", to_string(c.profile.shape)},
                  {"grid_span_MHz", c.profile.grid_span_MHz},
                  {"grid_step_MHz", c.profile.grid_step_MHz},
                  {"alpha_l0", c.profile.alpha_l0},
                  {"line_fwhm_MHz", c.profile.line_fwhm_MHz}};
  j["laser"] = {{"linewidth_MHz", c.laser_linewidth_MHz},
                {"lineshape", c.laser_lineshape == Lineshape::kGaussian ? "gaussian" : "lorentzian"}};
  j["calibration"] = {{"stim_slope_per_mW_ms", c.compile.stim_slope_per_mW_ms},
                      {"rf_coupling_per_V2_ms", c.compile.rf_coupling_per_V2_ms}};
  json seq;
  if (c.compile.dt_max_ms) seq["dt_max_ms"] = *c.compile.dt_max_ms;
  seq["pulses"] = json::array();
  for (const auto& p : c.sequence) seq["pulses"].push_back(pulse_json(p));
  j["sequence"] = seq;

  const auto& o = c.outputs;
  json out = {{"spectra", o.spectra},
              {"spectra_prefix", o.spectra_prefix},
              {"baseline_file", o.baseline_file},
              {"trace_file", o.trace_file},
              {"trace_noise_sigma", o.trace_noise_sigma},
              {"fit_file", o.fit_file},
              {"metrics_file", o.metrics_file},
              {"manifest_file", o.manifest_file}};
  if (o.trace_window) out["trace_window"] = window_json(o.trace_window);
  if (o.metrics_window) out["metrics_window"] = window_json(o.metrics_window);
  if (o.fit_model) out["fit"] = *o.fit_model;
  j["outputs"] = out;

  if (c.scan) {
    const auto& s = *c.scan;
    json scan;
    scan["axes"] = json::array();
    for (const auto& a : s.axes) {
      scan["axes"].push_back(
          {{"name", a.name}, {"path", a.path}, {"values", a.values}, {"offset", a.offset}});
    }
    scan["observable"] = to_string(s.observable);
    if (s.fit_model) scan["fit"] = *s.fit_model;
    scan["normalize_first"] = s.normalize_first;
    if (s.followup_parameter) scan["followup"] = *s.followup_parameter;
    scan["file"] = s.file;
    scan["fits_file"] = s.fits_file;
    j["scan"] = scan;
  }
  return j;
}

json to_json(const FitResult& fit) {
  json params = json::array();
  for (const auto& p : fit.parameters) {
    params.push_back({{"name", p.name}, {"unit", p.unit}, {"value", p.value}, {"std_error", p.std_error}});
  }
  return {{"model", fit.model},
          {"parameters", params},
          {"residual_norm", fit.residual_norm},
          {"gradient_norm", fit.gradient_norm},
          {"converged", fit.converged},
          {"degenerate", fit.degenerate},
          {"iterations", fit.iterations}};
}

}  // namespace detail

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

std::string to_string(Observable o) {
  switch (o) {
    case Observable::kHoleArea:
      return "hole_area";
    case Observable::kRho1Res:
      return "rho1_res";
    case Observable::kRemainingTotalFraction:
      return "remaining_total_fraction";
    case Observable::kSpinPolarization:
      return "spin_polarization";
  }
  return "hole_area";
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("<root>: ") + e.what()});
  }

  Issues issues;
  ExperimentConfig c;
  ObjectReader root(doc, "", issues);
  root.string("name", c.name);
  root.integer("seed", c.seed);
  if (root.has("zeeman")) {
    ObjectReader r(root.at("zeeman"), "zeeman", issues);
    read_zeeman(r, c.zeeman, issues);
  }
  if (root.has("rates")) {
    ObjectReader r(root.at("rates"), "rates", issues);
    read_rates(r, c.rates, issues);
  }
  if (root.has("profile")) {
    ObjectReader r(root.at("profile"), "profile", issues);
    read_profile(r, c.profile, issues);
  }
  if (root.has("laser")) {
    ObjectReader r(root.at("laser"), "laser", issues);
    r.number("linewidth_MHz", c.laser_linewidth_MHz);
    if (r.has("lineshape")) {
      std::string shape;
      r.string("lineshape", shape);
      if (shape == "gaussian") {
        c.laser_lineshape = Lineshape::kGaussian;
      } else if (shape != "lorentzian") {
        issues.add("laser.lineshape", "expected lorentzian or gaussian");
      }
    }
    r.finish();
    check(issues, c.laser_linewidth_MHz > 0.0, "laser.linewidth_MHz", "must be > 0");
  }
  if (root.has("calibration")) {
    ObjectReader r(root.at("calibration"), "calibration", issues);
    r.number("stim_slope_per_mW_ms", c.compile.stim_slope_per_mW_ms);
    r.number("rf_coupling_per_V2_ms", c.compile.rf_coupling_per_V2_ms);
    r.finish();
    check(issues, c.compile.stim_slope_per_mW_ms >= 0.0, "calibration.stim_slope_per_mW_ms",
          "must be >= 0");
    check(issues, c.compile.rf_coupling_per_V2_ms >= 0.0, "calibration.rf_coupling_per_V2_ms",
          "must be >= 0");
  }
  if (root.has("sequence")) {
    ObjectReader r(root.at("sequence"), "sequence", issues);
    read_sequence(r, c, issues);
  }
  if (root.has("outputs")) {
    ObjectReader r(root.at("outputs"), "outputs", issues);
    read_outputs(r, c.outputs, issues);
  }
  if (root.has("scan") && !root.at("scan").is_null()) {
    ObjectReader r(root.at("scan"), "scan", issues);
    ScanConfig scan;
    read_scan(r, scan, issues);
    c.scan = scan;
  }
  root.finish();
  check_distinct_outputs(c, issues);

  if (issues.list.empty()) {
    // Cross-pulse rules (channel overlaps) are owned by the compiler.
    try {
      compile(c.sequence, c.compile);
    } catch (const Error& e) {
      issues.add("sequence.pulses", e.what());
    }
  }
  if (!issues.list.empty()) throw ConfigError(issues.list);
  return c;
}

std::string serialize_config(const ExperimentConfig& config, int indent) {
  return detail::to_json(config).dump(indent);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : serialize_config(config, -1)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fit_result_json(const FitResult& fit, int indent) {
  return detail::to_json(fit).dump(indent);
}

FitResult fit_by_name(const std::string& model, const XYData& data) {
  if (model == "doubleexp") return fit_double_exponential(data);
  if (model == "lorentzian") return fit_lorentzian(data);
  if (model == "linear") return to_fit_result(fit_linear(data));
  if (model == "expoffset") return fit_exponential_offset(data);
  throw Error("unknown fit model '" + model +
              "' (expected doubleexp, lorentzian, linear or expoffset)");
}

}  // namespace shb
