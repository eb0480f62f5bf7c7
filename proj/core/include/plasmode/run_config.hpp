#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plasmode/monte_carlo.hpp"
#include "plasmode/resample.hpp"
#include "plasmode/scenario.hpp"

namespace plasmode {

// Configuration problem with a message naming the offending field/key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inverse of TermSpec::label(): "a", "w1", "w1*w2", "w1^2", "I(w1>0.2)".
TermSpec parse_term(const std::string& text);

struct GenerationOptions {
  GenerationModelSource ps = GenerationModelSource::fitted_on_source;
  GenerationModelSource outcome = GenerationModelSource::true_model;
  Eigen::Index replicate_size = 0;  // 0 => source size
};

// A full study request, loadable from a JSON file (see docs/config.md for the
// grammar). The scenario is either a built-in id or an inline definition.
struct RunConfig {
  std::string scenario_id;                     // built-in id, or "custom" for inline
  std::optional<ScenarioSpec> inline_scenario; // set iff the config inlined a scenario
  std::string covariates_csv;                  // recorded path when the inline scenario
                                               // bootstraps a covariate table from disk
  Eigen::Index n = 1000;
  int replicates = 100;
  std::vector<Framework> frameworks = {Framework::sample_treatment,
                                       Framework::generate_treatment};
  std::vector<std::string> estimators;
  std::vector<std::string> estimands = {"ate"};
  std::uint64_t master_seed = 1;
  int n_sources = 1;
  std::string output_dir = "plasmode-out";
  GenerationOptions generation;

  ScenarioSpec resolve_scenario() const;  // inline spec or builtin_scenario(scenario_id)
  MonteCarloConfig to_monte_carlo(int workers = 1) const;
};

// Parse/validate config text. All keys are checked (unknown keys are errors),
// estimands are checked against the scenario's outcome kind, and inline
// scenarios are fully resolved (a covariates_csv is loaded relative to
// base_dir). Throws ConfigError with a field-level message.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Canonical JSON (defaults made explicit, fixed key order). Round trip:
// parse(serialize(x)) reproduces x, and serialize(parse(t)) is canonical.
std::string serialize_run_config(const RunConfig& cfg);

const std::vector<std::string>& builtin_config_names();
RunConfig builtin_run_config(const std::string& name);  // throws ConfigError if unknown

}  // namespace plasmode
