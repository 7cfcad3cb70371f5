#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gqmech/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gqmech: constrained Hamiltonian mechanics and its geometric "
               "quantization -- scenario runner and verification harness"};
  app.require_subcommand(1);

  gqm::RunOptions opts;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario from a config file");
  run->add_option("-c,--config", opts.config_path, "path to a JSON scenario config");
  run->add_option("-s,--scenario", opts.scenario,
                  "scenario id (uses built-in defaults when no config is given)");
  run->add_option("-o,--output-dir", opts.output_dir, "output directory")
      ->capture_default_str();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the configured random seed");
  run->add_flag("-v,--verbose", "print per-check detail lines");
  run->add_flag("--json", "print the report as JSON to stdout");

  CLI::App* list = app.add_subcommand("list-scenarios", "list scenario ids");
  list->add_flag("--json", "machine-readable listing");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    if (list->count("--json"))
      std::cout << gqm::list_scenarios_json() << "\n";
    else
      std::cout << gqm::list_scenarios_text();
    return 0;
  }

  if (seed_opt->count() > 0) opts.seed_override = seed;
  opts.verbosity = static_cast<int>(run->count("--verbose"));
  opts.json_report = run->count("--json") > 0;
  return gqm::run_scenario(opts);
}
