#include "catrl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "catrl/algorithms/control.hpp"
#include "catrl/algorithms/dp.hpp"
#include "catrl/algorithms/oracles.hpp"
#include "catrl/approx/train.hpp"
#include "catrl/bellman.hpp"
#include "catrl/csv.hpp"
#include "catrl/environments.hpp"
#include "catrl/errors.hpp"

namespace catrl::experiment {
namespace {

using algorithms::ControlParams;
using algorithms::TrainReport;
using config::ExperimentConfig;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Environment parameters, read once each; leftovers are an error.
class EnvParams {
 public:
  explicit EnvParams(const ExperimentConfig& c) : params_(c.env_params) {}

  std::optional<std::string> take(const std::string& key) {
    used_.insert(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return std::nullopt;
    return it->second;
  }

  template <class T>
  T number(const std::string& key, T fallback) {
    const auto text = take(key);
    if (!text) return fallback;
    return parse<T>(*text, key);
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (const auto text = take(key)) {
      for (const auto& item : split_list(*text)) out.push_back(parse<double>(item, key));
    }
    return out;
  }

  std::vector<Cell> cells(const std::string& key) {
    std::vector<Cell> out;
    if (const auto text = take(key)) {
      for (const auto& item : split_list(*text)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("environment." + key + ": cells are written row:col");
        }
        out.push_back({parse<int>(trim(item.substr(0, colon)), key),
                       parse<int>(trim(item.substr(colon + 1)), key)});
      }
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : params_) {
      if (!used_.count(key)) throw ConfigError("unknown key environment." + key);
    }
  }

 private:
  template <class T>
  static T parse(const std::string& text, const std::string& key) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError("environment." + key + ": cannot parse '" + text + "'");
    }
    return value;
  }

  std::map<std::string, std::string> params_;
  std::set<std::string> used_;
};

Mdp build_mdp_from(EnvParams& params, const ExperimentConfig& c) {
  const double gamma = c.hyper.gamma;
  const std::string& name = c.environment;
  Mdp mdp = [&]() -> Mdp {
    if (name == "gridworld") {
      GridSpec spec;
      spec.width = params.number("width", spec.width);
      spec.height = params.number("height", spec.height);
      spec.walls = params.cells("walls");
      spec.goals = params.cells("goals");
      spec.starts = params.cells("starts");
      spec.goal_reward = params.number("goal_reward", spec.goal_reward);
      spec.step_reward = params.number("step_reward", spec.step_reward);
      spec.gamma = gamma;
      return gridworld(spec);
    }
    if (name == "corner_gridworld") return corner_gridworld(gamma);
    if (name == "cliff_walking") return cliff_walking(gamma);
    if (name == "two_state_chain") return two_state_chain(gamma);
    if (name == "chain_mrp") {
      ChainRewards rewards;
      rewards.left_exit = params.number("left_exit", rewards.left_exit);
      rewards.right_exit = params.number("right_exit", rewards.right_exit);
      rewards.step = params.number("step_reward", rewards.step);
      const int n = params.number("n", 5);
      const double p_right = params.number("p_right", 0.5);
      return chain_mrp(n, rewards, gamma, p_right);
    }
    throw ConfigError("environment " + name + " is not a Markov process");
  }();
  if (const auto policy = params.take("policy")) {
    if (*policy != "uniform") throw ConfigError("environment.policy must be uniform");
    mdp = induced_mrp(mdp, uniform_policy(mdp.num_states(), mdp.num_actions()));
  }
  return mdp;
}

std::vector<FiniteDist<double>> build_arms(EnvParams& params) {
  std::vector<FiniteDist<double>> arms;
  for (double r : params.numbers("arms")) arms.push_back(dirac(r));
  for (double p : params.numbers("bernoulli")) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("environment.bernoulli must lie in [0, 1]");
    arms.push_back(FiniteDist<double>({{1.0, p}, {0.0, 1.0 - p}}));
  }
  if (arms.empty()) throw ConfigError("environment.arms or environment.bernoulli is required");
  return arms;
}

algorithms::Budget budget_of(const config::Hyperparameters& h) {
  return {h.episodes, h.steps};
}

ControlParams control_params(const ExperimentConfig& c) {
  const auto& h = c.hyper;
  ControlParams p;
  p.alpha = h.alpha;
  p.epsilon = h.epsilon;
  p.gamma = h.gamma;
  p.seed = *c.seed;
  p.budget = budget_of(h);
  p.max_episode_length = h.max_episode_length;
  p.initial_q = h.initial_q;
  p.step_size = h.step_size == "inverse_visits" ? algorithms::StepSize::kInverseVisits
                                                : algorithms::StepSize::kConstant;
  return p;
}

std::string table_csv(const QTable& q) {
  std::ostringstream out;
  write_csv(out, q);
  return out.str();
}

std::string value_csv(const ValueFn& v) {
  std::ostringstream out;
  write_csv(out, v);
  return out.str();
}

std::string curve_csv(const TrainReport& r) {
  std::ostringstream out;
  algorithms::write_curve_csv(out, r);
  return out.str();
}

// Mean return over the last (up to) 100 curve points.
double final_mean_return(const TrainReport& r) {
  const std::size_t n = std::min<std::size_t>(100, r.curve.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = r.curve.size() - n; i < r.curve.size(); ++i) total += r.curve[i].ret;
  return total / static_cast<double>(n);
}

std::string header(const ExperimentConfig& c) {
  return c.label() + ": algorithm=" + c.algorithm + " env=" + c.environment +
         " seed=" + std::to_string(*c.seed);
}

RunResult learning_result(const ExperimentConfig& c, TrainReport report, bool values) {
  RunResult r;
  r.label = c.label();
  r.files.push_back({"curve.csv", curve_csv(report)});
  if (values) {
    r.files.push_back({"v.csv", value_csv(algorithms::state_values(report.q))});
  } else {
    r.files.push_back({"q.csv", table_csv(report.q)});
  }
  const char* unit = report.unit == algorithms::CurveUnit::kEpisode ? " episodes=" : " points=";
  r.summary = header(c) + unit + std::to_string(report.curve.size()) +
              " steps=" + std::to_string(report.steps) +
              " mean_return=" + format_number(report.mean_return()) +
              " final_mean_return=" + format_number(final_mean_return(report));
  r.report = std::move(report);
  return r;
}

std::string policy_csv(const Mdp& mdp, const Policy& pi) {
  std::ostringstream out;
  out << "s,a\n";
  for (State s = 0; s < mdp.num_states(); ++s) {
    const auto dist = pi.action_distribution(s);
    Action best = dist.begin()->value;
    double weight = -1.0;
    for (const auto& atom : dist) {
      if (atom.weight > weight) {
        weight = atom.weight;
        best = atom.value;
      }
    }
    out << s << ',' << best << '\n';
  }
  return out.str();
}

RunResult dp_result(const ExperimentConfig& c, const Mdp& mdp,
                    const algorithms::DpResult& result) {
  RunResult r;
  r.label = c.label();
  r.files.push_back({"v.csv", value_csv(result.v)});
  r.files.push_back({"policy.csv", policy_csv(mdp, result.policy)});
  r.summary = header(c) + " sweeps=" + std::to_string(result.sweeps) +
              " improvements=" + std::to_string(result.improvements) +
              " max_v=" + format_number(*std::max_element(result.v.values().begin(),
                                                          result.v.values().end()));
  return r;
}

}  // namespace

Mdp build_mdp(const ExperimentConfig& c) {
  EnvParams params(c);
  Mdp mdp = build_mdp_from(params, c);
  params.finish();
  return mdp;
}

RunResult run(const ExperimentConfig& c) {
  config::validate(c);
  const auto& h = c.hyper;
  const std::string& algo = c.algorithm;
  const ControlParams p = control_params(c);

  if (algo == "bandit_epsilon_greedy") {
    EnvParams params(c);
    const auto arms = build_arms(params);
    params.finish();
    return learning_result(
        c,
        algorithms::bandit_epsilon_greedy(multi_armed_bandit(arms),
                                          static_cast<int>(arms.size()), p),
        false);
  }

  const Mdp mdp = build_mdp(c);
  if (algo == "value_iteration") return dp_result(c, mdp, algorithms::value_iteration(mdp, h.tol));
  if (algo == "policy_iteration") {
    return dp_result(c, mdp, algorithms::policy_iteration(mdp, h.tol));
  }
  if (algo == "gpi") return dp_result(c, mdp, algorithms::gpi(mdp, h.m, h.n, h.tol));
  if (algo == "policy_evaluation") {
    const auto eval =
        algorithms::evaluate_policy(mdp, uniform_policy(mdp.num_states(), 1), h.tol);
    RunResult r;
    r.label = c.label();
    r.files.push_back({"v.csv", value_csv(eval.v)});
    r.summary = header(c) + " sweeps=" + std::to_string(eval.sweeps);
    return r;
  }
  if (algo == "sarsa") return learning_result(c, algorithms::sarsa(mdp, p), false);
  if (algo == "sarsa_internal") {
    return learning_result(c, algorithms::sarsa_internal_policy(mdp, p), false);
  }
  if (algo == "q_learning") return learning_result(c, algorithms::q_learning(mdp, p), false);
  if (algo == "expected_sarsa") {
    return learning_result(c, algorithms::expected_sarsa(mdp, p), false);
  }
  if (algo == "n_step_sarsa") {
    return learning_result(c, algorithms::n_step_sarsa(mdp, h.n, p), false);
  }
  if (algo == "mc_control") return learning_result(c, algorithms::mc_control(mdp, p), false);
  if (algo == "td0") return learning_result(c, algorithms::td0_run(mdp, p), true);
  if (algo == "mc_prediction") {
    return learning_result(c, algorithms::mc_prediction_run(mdp, p), true);
  }
  if (algo == "q_learning_offline") {
    const auto log = algorithms::log_transitions(
        mdp, uniform_policy(mdp.num_states(), mdp.num_actions()), h.dataset_steps,
        EpisodeMode{h.max_episode_length}, *c.seed);
    const auto env = offline_env(
        log, h.replay == "sequential" ? ReplayOrder::kSequential : ReplayOrder::kUniform);
    return learning_result(
        c, algorithms::q_learning_offline(env, mdp.num_states(), mdp.num_actions(), p), false);
  }
  if (algo == "dqn") {
    approx::ApproxParams ap;
    ap.alpha = h.alpha;
    ap.epsilon = h.epsilon;
    ap.gamma = h.gamma;
    ap.seed = *c.seed;
    ap.budget = budget_of(h);
    ap.max_episode_length = h.max_episode_length;
    ap.rule = approx::target_rule_from_name(h.rule);
    ap.init_scale = h.init_scale;
    const auto net = h.hidden == 0
                         ? approx::QNetwork::linear(mdp.num_states(), mdp.num_actions())
                         : approx::QNetwork::mlp(mdp.num_states(), h.hidden, mdp.num_actions());
    auto out = approx::dqn_train(mdp, net, ap);
    std::ostringstream params;
    approx::write_params_csv(params, out.theta);
    RunResult r = learning_result(c, std::move(out.report), false);
    r.files.push_back({"params.csv", params.str()});
    return r;
  }
  if (algo == "actor_critic") {
    approx::ActorCriticParams ap;
    ap.alpha_actor = h.alpha;
    ap.alpha_critic = h.alpha_critic;
    ap.gamma = h.gamma;
    ap.seed = *c.seed;
    ap.budget = budget_of(h);
    ap.max_episode_length = h.max_episode_length;
    ap.init_scale = h.init_scale;
    const approx::ActorCritic ac{
        h.hidden == 0 ? approx::QNetwork::linear(mdp.num_states(), mdp.num_actions())
                      : approx::QNetwork::mlp(mdp.num_states(), h.hidden, mdp.num_actions()),
        approx::QNetwork::linear(mdp.num_states(), 1), h.temperature};
    auto out = approx::actor_critic_train(mdp, ac, ap);
    std::ostringstream params;
    approx::write_params_csv(params, out.theta);
    std::ostringstream critic;
    approx::write_params_csv(critic, *out.omega);
    RunResult r = learning_result(c, std::move(out.report), false);
    r.files.push_back({"params.csv", params.str()});
    r.files.push_back({"critic_params.csv", critic.str()});
    return r;
  }
  throw ConfigError("experiment.algorithm '" + algo + "' cannot be run");
}

std::string join_curves(const RunResult& a, const RunResult& b) {
  if (!a.report || !b.report) throw ConfigError("compare needs two learning runs");
  const TrainReport& ra = *a.report;
  const TrainReport& rb = *b.report;
  if (ra.unit != rb.unit) throw ConfigError("curves count different units (episode vs step)");
  if (ra.curve.size() != rb.curve.size()) {
    throw ConfigError("curves have different lengths (" + std::to_string(ra.curve.size()) +
                      " vs " + std::to_string(rb.curve.size()) + ")");
  }
  std::ostringstream out;
  out << (ra.unit == algorithms::CurveUnit::kEpisode ? "episode" : "step")
      << ",return_a,return_b\n";
  for (std::size_t i = 0; i < ra.curve.size(); ++i) {
    out << ra.curve[i].index << ',' << format_number(ra.curve[i].ret) << ','
        << format_number(rb.curve[i].ret) << '\n';
  }
  return out.str();
}

OracleComparison compare_with_oracle(const ExperimentConfig& c) {
  config::validate(c);
  const std::string& algo = c.algorithm;
  const ControlParams p = control_params(c);

  std::vector<std::vector<double>> ours;
  const algorithms::StepObserver record = [&ours](const algorithms::StepTrace& t) {
    ours.emplace_back(t.q.data().begin(), t.q.data().end());
  };
  std::vector<std::vector<double>> theirs;
  const oracles::TableObserver record_oracle = [&theirs](std::size_t,
                                                         std::span<const double> q) {
    theirs.emplace_back(q.begin(), q.end());
  };

  if (algo == "bandit_epsilon_greedy") {
    EnvParams params(c);
    const auto arms = build_arms(params);
    params.finish();
    algorithms::bandit_epsilon_greedy(multi_armed_bandit(arms), static_cast<int>(arms.size()),
                                      p, record);
    oracles::oracle_bandit(arms, p, record_oracle);
  } else {
    const Mdp mdp = build_mdp(c);
    if (algo == "sarsa") {
      algorithms::sarsa(mdp, p, record);
      oracles::oracle_sarsa(mdp, p, record_oracle);
    } else if (algo == "sarsa_internal") {
      algorithms::sarsa_internal_policy(mdp, p, record);
      oracles::oracle_sarsa(mdp, p, record_oracle);
    } else if (algo == "q_learning") {
      algorithms::q_learning(mdp, p, record);
      oracles::oracle_q_learning(mdp, p, record_oracle);
    } else if (algo == "expected_sarsa") {
      algorithms::expected_sarsa(mdp, p, record);
      oracles::oracle_expected_sarsa(mdp, p, record_oracle);
    } else if (algo == "n_step_sarsa") {
      algorithms::n_step_sarsa(mdp, c.hyper.n, p, record);
      oracles::oracle_n_step_sarsa(mdp, c.hyper.n, p, record_oracle);
    } else if (algo == "mc_control") {
      algorithms::mc_control(mdp, p, record);
      oracles::oracle_mc(mdp, p, record_oracle);
    } else if (algo == "td0") {
      algorithms::td0_run(mdp, p, record);
      oracles::oracle_td0(mdp, p, record_oracle);
    } else if (algo == "mc_prediction") {
      algorithms::mc_prediction_run(mdp, p, record);
      oracles::oracle_mc_prediction(mdp, p, record_oracle);
    } else {
      throw ConfigError("no direct implementation to compare " + algo + " against");
    }
  }

  if (ours.size() != theirs.size()) {
    throw ConfigError("runs took different numbers of steps (" + std::to_string(ours.size()) +
                      " vs " + std::to_string(theirs.size()) + ")");
  }
  OracleComparison result;
  std::ostringstream out;
  out << "step,max_abs_dq\n";
  for (std::size_t t = 0; t < ours.size(); ++t) {
    double diff = 0.0;
    if (ours[t].size() != theirs[t].size()) {
      diff = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < ours[t].size(); ++i) {
        diff = std::max(diff, std::abs(ours[t][i] - theirs[t][i]));
      }
    }
    result.max_difference = std::max(result.max_difference, diff);
    out << t << ',' << format_number(diff) << '\n';
  }
  result.csv = out.str();
  result.steps = ours.size();
  return result;
}

}  // namespace catrl::experiment
