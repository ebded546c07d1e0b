// Command-line front end: excitrans <simulate|optimize|sweep|compare|verify> [options]

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "excitrans/commands.hpp"
#include "excitrans/errors.hpp"
#include "excitrans/scenario.hpp"

namespace {

nlohmann::json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw excitrans::ConfigError("scenario", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw excitrans::ConfigError("scenario", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Excitation transport through driven open quantum networks"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string scenario_path, preset_name, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool strict = false, list_presets = false, print_scenario = false;
  app.add_option("--scenario", scenario_path, "Scenario JSON file");
  app.add_option("--preset", preset_name, "Built-in scenario (see --list-presets)");
  app.add_option("--out", out_dir, "Output directory (default: scenario 'output' or ./out)");
  app.add_option("--seed", seed, "Override master_seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict-convergence", strict, "Fail when I_P(T_L) is not converged in dt");
  app.add_flag("--list-presets", list_presets, "Print preset names and exit");
  app.add_flag("--print-scenario", print_scenario, "Print the resolved scenario and exit");

  for (const auto& [name, help] :
       {std::pair{"simulate", "Evolve the unoptimised model up to T"},
        {"optimize", "Learn the strategy's parameters on [0, T_L], then evolve up to T"},
        {"sweep", "I_P(T_L) over the omega_r grid"},
        {"compare", "Sink-probability ratios of optimised members against their baselines"},
        {"verify", "Oracle, convergence, gradient and invariant checks"}})
    app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : excitrans::kExitConfig;
  }

  if (list_presets) {
    for (const auto& name : excitrans::preset_names()) std::cout << name << '\n';
    return 0;
  }

  excitrans::Scenario scenario;
  try {
    if (!scenario_path.empty() && !preset_name.empty())
      throw excitrans::ConfigError("scenario", "give either --scenario or --preset, not both");
    nlohmann::json doc = !scenario_path.empty() ? load_document(scenario_path)
                         : !preset_name.empty() ? excitrans::preset(preset_name)
                                                : excitrans::preset("default");
    if (seed) doc["master_seed"] = *seed;
    scenario = excitrans::scenario_from_json(doc);
  } catch (const excitrans::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return excitrans::kExitConfig;
  }

  if (print_scenario) {
    std::cout << excitrans::scenario_to_json(scenario).dump(2) << '\n';
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return excitrans::kExitConfig;
  }

  excitrans::RunOptions opts;
  opts.out_dir = !out_dir.empty() ? out_dir : !scenario.output.empty() ? scenario.output : "out";
  opts.threads = threads;
  opts.strict_convergence = strict;
  opts.log = &std::cout;
  return excitrans::run_command(app.get_subcommands().front()->get_name(), scenario, opts,
                                std::cerr);
}
