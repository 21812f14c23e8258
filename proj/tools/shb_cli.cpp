// Command-line front end: run configs or presets, fit CSV data, list presets.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "shb/config.hpp"
#include "shb/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw shb::Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("SHB_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "shb_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral hole burning simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config or a preset");
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  unsigned threads = 1;
  run_cmd->add_option("config", config_path, "Experiment config (JSON)");
  run_cmd->add_option("--preset", preset_name, "Run a bundled preset instead of a file");
  run_cmd->add_option("--out", out_dir, "Output directory (default: $SHB_OUT_DIR or ./shb_out)");
  run_cmd->add_option("--threads", threads, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);

  auto* fit_cmd = app.add_subcommand("fit", "Fit a two-column CSV (x,y)");
  std::string csv_path;
  std::string model;
  fit_cmd->add_option("csv", csv_path, "Input CSV")->required();
  fit_cmd->add_option("--model", model, "Fit model")
      ->required()
      ->check(CLI::IsMember({"doubleexp", "lorentzian", "linear", "expoffset"}));

  auto* list_cmd = app.add_subcommand("list-presets", "List bundled presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (config_path.empty() == preset_name.empty()) {
        std::cerr << "error: give either a config file or --preset NAME\n";
        return 2;
      }
      const shb::ExperimentConfig config = preset_name.empty()
                                               ? shb::parse_config(read_file(config_path))
                                               : shb::preset(preset_name);
      const std::string dir = out_dir.empty() ? default_out_dir() : out_dir;
      const shb::ScenarioReport report = shb::run_scenario(config, dir, threads);
      if (report.simulation) {
        for (const auto& d : report.simulation->diagnostics) std::cerr << "warning: " << d << '\n';
      }
      for (const auto& f : report.files) std::cout << f.string() << '\n';
    } else if (*fit_cmd) {
      std::ifstream in(csv_path);
      if (!in) throw shb::Error("cannot read " + csv_path);
      const shb::XYData data = shb::read_xy_csv(in);
      const shb::FitResult fit = shb::fit_by_name(model, data);
      std::cout << shb::fit_result_json(fit) << '\n';
    } else if (*list_cmd) {
      for (const auto& p : shb::list_presets()) std::cout << p.name << "\t" << p.description << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
