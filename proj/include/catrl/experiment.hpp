#pragma once

// Runs a validated experiment config and renders its outputs.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catrl/algorithms/report.hpp"
#include "catrl/config.hpp"
#include "catrl/mdp.hpp"

namespace catrl::experiment {

struct OutputFile {
  std::string suffix;  // e.g. "curve.csv"; the file is <label>_<suffix>
  std::string content;
};

struct RunResult {
  std::string label;
  std::vector<OutputFile> files;
  std::string summary;  // one line, no trailing newline
  std::optional<algorithms::TrainReport> report;
};

// Builds the environment named in the config (with `policy = uniform`
// turning an MDP into its reward process). Not valid for bandits.
Mdp build_mdp(const config::ExperimentConfig& c);

// Validates and runs. ConfigError / DomainError / NonConvergence propagate.
RunResult run(const config::ExperimentConfig& c);

// Curves joined by index: "<unit>,return_a,return_b". Throws ConfigError when
// the units or lengths differ.
std::string join_curves(const RunResult& a, const RunResult& b);

// Reruns the config with its direct textbook implementation and reports the
// per-step max |ΔQ| between the two tables: "step,max_abs_dq".
struct OracleComparison {
  std::string csv;
  double max_difference = 0.0;
  std::size_t steps = 0;
};
OracleComparison compare_with_oracle(const config::ExperimentConfig& c);

}  // namespace catrl::experiment
