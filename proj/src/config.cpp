#include "catrl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>

#include "catrl/csv.hpp"
#include "catrl/errors.hpp"

namespace catrl::config {
namespace {

namespace pt = boost::property_tree;

template <class T>
T parse_number(const std::string& text, const std::string& field) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(field + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (tree_ == nullptr) return std::nullopt;
    const auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return child->data();
  }

  void read(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }
  template <class T>
  void read(const std::string& key, T& out) {
    if (auto v = raw(key)) out = parse_number<T>(*v, field(key));
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  // Everything not read so far.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    if (tree_ == nullptr) return out;
    for (const auto& [key, _] : *tree_) {
      if (!used_.count(key)) out.push_back(key);
    }
    return out;
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  const auto c = root.get_child_optional(pt::ptree::path_type(name, '\0'));
  return c ? &*c : nullptr;
}

void reject_unused(const Section& s, const std::string& name) {
  const auto extra = s.unused();
  if (!extra.empty()) throw ConfigError("unknown key " + name + "." + extra.front());
}

const AlgorithmInfo* find_algorithm(const std::string& name) {
  for (const auto& a : algorithms()) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const EnvironmentInfo* find_environment(const std::string& name) {
  for (const auto& e : environments()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void check_unit_interval(double x, const std::string& field) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ConfigError(field + " must lie in [0, 1], got " + format_number(x));
  }
}

}  // namespace

std::string ExperimentConfig::label() const {
  return name.empty() ? algorithm + "_" + environment : name;
}

const std::vector<AlgorithmInfo>& algorithms() {
  static const std::vector<AlgorithmInfo> list{
      {"value_iteration", "dp", "value iteration until the sup-norm change is below tol"},
      {"policy_iteration", "dp", "policy iteration with full evaluation"},
      {"gpi", "dp", "generalized policy iteration: m improvements, n evaluation sweeps"},
      {"policy_evaluation", "prediction_dp", "evaluate the reward process exactly (to tol)"},
      {"sarsa", "control", "on-policy TD control, sample (s, a, r, s', a')"},
      {"sarsa_internal", "control", "SARSA from (s, a, r, s') with the model drawing a'"},
      {"q_learning", "control", "off-policy TD control with a max target"},
      {"expected_sarsa", "control", "TD control with the expected target under ε-greedy"},
      {"n_step_sarsa", "control", "n-step SARSA (n from hyperparameters)"},
      {"mc_control", "control", "first-visit Monte Carlo control, constant α"},
      {"td0", "prediction", "TD(0) prediction on a reward process"},
      {"mc_prediction", "prediction", "first-visit Monte Carlo prediction"},
      {"bandit_epsilon_greedy", "bandit", "ε-greedy action values on a multi-armed bandit"},
      {"q_learning_offline", "offline",
       "Q-learning replaying dataset_steps transitions logged under a uniform policy"},
      {"dqn", "approx", "semi-gradient Q-network (hidden = 0: linear), SGD"},
      {"actor_critic", "approx", "softmax actor with a linear critic baseline"},
  };
  return list;
}

const std::vector<EnvironmentInfo>& environments() {
  static const std::vector<EnvironmentInfo> list{
      {"gridworld", "mdp",
       "width, height, walls, goals, starts (cells 'r:c' comma-separated), goal_reward, "
       "step_reward"},
      {"corner_gridworld", "mdp", "4x4 grid, terminal corners, -1 per move"},
      {"cliff_walking", "mdp", "4x12 cliff, -1 per move, -100 for the cliff"},
      {"two_state_chain", "mdp", "s0 --go--> s1 (reward 1), stay keeps s0"},
      {"chain_mrp", "mrp", "random walk: n, p_right, left_exit, right_exit, step_reward"},
      {"bandit", "bandit",
       "arms = comma-separated fixed rewards, or bernoulli = comma-separated probabilities"},
  };
  return list;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, _] : root) {
    if (section != "experiment" && section != "environment" && section != "hyperparameters") {
      throw ConfigError("unknown section [" + section + "]");
    }
  }
  ExperimentConfig c;
  c.source = source;

  Section exp(child(root, "experiment"), "experiment");
  exp.read("name", c.name);
  exp.read("algorithm", c.algorithm);
  exp.read("out", c.out);
  if (auto seed = exp.raw("seed")) c.seed = parse_number<std::uint64_t>(*seed, "experiment.seed");
  reject_unused(exp, "experiment");

  if (const pt::ptree* env = child(root, "environment")) {
    for (const auto& [key, value] : *env) {
      if (key == "name") {
        c.environment = value.data();
      } else {
        c.env_params[key] = value.data();
      }
    }
  }

  Hyperparameters& h = c.hyper;
  Section hp(child(root, "hyperparameters"), "hyperparameters");
  hp.read("alpha", h.alpha);
  hp.read("gamma", h.gamma);
  hp.read("epsilon", h.epsilon);
  hp.read("n", h.n);
  hp.read("m", h.m);
  hp.read("episodes", h.episodes);
  hp.read("steps", h.steps);
  hp.read("tol", h.tol);
  hp.read("max_episode_length", h.max_episode_length);
  hp.read("initial_q", h.initial_q);
  hp.read("step_size", h.step_size);
  hp.read("temperature", h.temperature);
  hp.read("alpha_critic", h.alpha_critic);
  hp.read("hidden", h.hidden);
  hp.read("rule", h.rule);
  hp.read("init_scale", h.init_scale);
  hp.read("dataset_steps", h.dataset_steps);
  hp.read("replay", h.replay);
  reject_unused(hp, "hyperparameters");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, path);
}

void validate(const ExperimentConfig& c) {
  if (!c.seed) throw ConfigError("experiment.seed is required");
  if (c.algorithm.empty()) throw ConfigError("experiment.algorithm is required");
  if (c.environment.empty()) throw ConfigError("environment.name is required");
  const AlgorithmInfo* algo = find_algorithm(c.algorithm);
  if (algo == nullptr) throw ConfigError("unknown experiment.algorithm '" + c.algorithm + "'");
  const EnvironmentInfo* env = find_environment(c.environment);
  if (env == nullptr) throw ConfigError("unknown environment.name '" + c.environment + "'");

  const Hyperparameters& h = c.hyper;
  check_unit_interval(h.gamma, "hyperparameters.gamma");
  check_unit_interval(h.epsilon, "hyperparameters.epsilon");
  check_unit_interval(h.alpha, "hyperparameters.alpha");
  check_unit_interval(h.alpha_critic, "hyperparameters.alpha_critic");
  if (!(h.tol > 0.0)) throw ConfigError("hyperparameters.tol must be > 0");
  if (h.n < 1) throw ConfigError("hyperparameters.n must be >= 1");
  if (h.m < 1) throw ConfigError("hyperparameters.m must be >= 1");
  if (h.hidden < 0) throw ConfigError("hyperparameters.hidden must be >= 0");
  if (h.max_episode_length < 0) {
    throw ConfigError("hyperparameters.max_episode_length must be >= 0");
  }
  if (!(h.temperature > 0.0)) throw ConfigError("hyperparameters.temperature must be > 0");
  if (h.step_size != "constant" && h.step_size != "inverse_visits") {
    throw ConfigError("hyperparameters.step_size must be constant or inverse_visits");
  }
  if (h.replay != "uniform" && h.replay != "sequential") {
    throw ConfigError("hyperparameters.replay must be uniform or sequential");
  }
  if (h.rule != "sarsa" && h.rule != "q_learning" && h.rule != "expected_sarsa") {
    throw ConfigError("hyperparameters.rule must be sarsa, q_learning or expected_sarsa");
  }

  const bool dp = algo->kind == "dp" || algo->kind == "prediction_dp";
  if (dp && !(h.gamma < 1.0)) {
    throw ConfigError("hyperparameters.gamma must be < 1 for dynamic programming");
  }
  if (!dp && h.episodes == 0 && h.steps == 0) {
    throw ConfigError("hyperparameters.episodes or hyperparameters.steps must be set");
  }

  // A prediction algorithm needs a reward process: chain_mrp, or an MDP run
  // under `policy = uniform`.
  const bool induced = c.env_params.count("policy") > 0;
  if (induced && c.env_params.at("policy") != "uniform") {
    throw ConfigError("environment.policy must be uniform");
  }
  const std::string env_kind = env->kind == "mdp" && induced ? "mrp" : env->kind;
  const bool wants_mrp = algo->kind == "prediction" || algo->kind == "prediction_dp";
  if (env_kind == "bandit" && algo->kind != "bandit") {
    throw ConfigError("environment bandit only supports bandit_epsilon_greedy");
  }
  if (algo->kind == "bandit" && env_kind != "bandit") {
    throw ConfigError(c.algorithm + " needs environment bandit");
  }
  if (wants_mrp && env_kind != "mrp") {
    throw ConfigError(c.algorithm + " is a prediction algorithm and needs a reward process "
                      "(chain_mrp, or environment.policy = uniform)");
  }
  if (!wants_mrp && env_kind == "mrp") {
    throw ConfigError(c.algorithm + " needs a decision process, not a reward process");
  }
}

}  // namespace catrl::config
