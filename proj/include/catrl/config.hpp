#pragma once

// Experiment configs: INI-style files with three sections.
//
//   [experiment]       name, algorithm, seed (required), out
//   [environment]      name plus environment parameters
//   [hyperparameters]  alpha, gamma, epsilon, n, m, episodes, steps, tol, ...
//
// Unknown keys are rejected so typos do not silently fall back to defaults.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace catrl::config {

struct Hyperparameters {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  int n = 1;  // n-step horizon; evaluation sweeps per round for gpi
  int m = 1;  // improvement steps per round for gpi
  std::size_t episodes = 0;
  std::size_t steps = 0;
  double tol = 1e-8;
  int max_episode_length = 0;
  double initial_q = 0.0;
  std::string step_size = "constant";  // or "inverse_visits"
  double temperature = 1.0;
  double alpha_critic = 0.1;
  int hidden = 0;  // 0: linear network
  std::string rule = "q_learning";
  double init_scale = 0.1;
  std::size_t dataset_steps = 1000;
  std::string replay = "uniform";  // or "sequential"
};

struct ExperimentConfig {
  std::string name;
  std::string algorithm;
  std::string environment;
  std::map<std::string, std::string> env_params;
  Hyperparameters hyper;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string source;  // where the config came from, for messages

  // The run's file prefix: `name`, or algorithm_environment.
  std::string label() const;
};

// Throws ConfigError naming the offending section/key.
ExperimentConfig parse_config(std::istream& in, const std::string& source);
ExperimentConfig load_config(const std::string& path);

// Field ranges and algorithm/environment compatibility; ConfigError.
void validate(const ExperimentConfig& config);

struct AlgorithmInfo {
  std::string name;
  std::string kind;  // "dp", "control", "prediction", "bandit", "approx", "offline"
  std::string summary;
};
struct EnvironmentInfo {
  std::string name;
  std::string kind;  // "mdp", "mrp", "bandit"
  std::string summary;
};

const std::vector<AlgorithmInfo>& algorithms();
const std::vector<EnvironmentInfo>& environments();

}  // namespace catrl::config
