#ifndef GQMECH_SCENARIO_HPP
#define GQMECH_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gqmech/report.hpp"

namespace gqm {

// Scenario runner: loads a structured configuration, executes the scenario,
// writes outputs, and emits a pass/fail report.
//
// Exit codes: 0 all checks pass, 1 check failure or runtime guard tripped,
// 2 configuration/validation error.
struct RunOptions {
  std::string config_path;  // empty: use the built-in defaults for `scenario`
  std::string scenario;     // scenario selector; must match the config if both set
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int verbosity = 0;
  bool json_report = false;  // machine-readable report on stdout
};

int run_scenario(const RunOptions& options);

// Built-in default configuration for a scenario id.
nlohmann::ordered_json default_config(const std::string& scenario);

// Validates a configuration (unknown keys are errors); throws ConfigError.
void validate_config(const nlohmann::ordered_json& config);

std::string list_scenarios_text();
std::string list_scenarios_json();

// Executes a validated configuration and returns the report (used by the
// runner and by tests; does not print).
VerificationReport execute_config(const nlohmann::ordered_json& config,
                                  const std::string& output_dir);

}  // namespace gqm

#endif  // GQMECH_SCENARIO_HPP
