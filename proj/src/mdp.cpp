#include "catrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "catrl/errors.hpp"

namespace catrl {

Mdp::Mdp(int num_states, int num_actions, std::vector<FiniteDist<Outcome>> transitions,
         double gamma, std::vector<bool> terminals, FiniteDist<State> start,
         std::vector<std::string> state_labels)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      gamma_(gamma),
      terminals_(std::move(terminals)),
      start_(std::move(start)),
      labels_(std::move(state_labels)) {
  if (num_states_ < 1 || num_actions_ < 1) {
    throw ConfigError("mdp: need at least one state and one action");
  }
  if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1], got " + std::to_string(gamma_));
  }
  const auto n = static_cast<std::size_t>(num_states_);
  if (transitions_.size() != n * static_cast<std::size_t>(num_actions_)) {
    throw ConfigError("mdp: transition table must have |S|*|A| entries");
  }
  if (terminals_.empty()) terminals_.assign(n, false);
  if (terminals_.size() != n) throw ConfigError("mdp: terminal flags must cover S");
  for (const auto& d : transitions_) {
    for (const auto& atom : d) {
      if (atom.value.next < 0 || atom.value.next >= num_states_ ||
          !std::isfinite(atom.value.reward)) {
        throw ConfigError("mdp: transition outcome out of range");
      }
    }
  }
  for (State s = 0; s < num_states_; ++s) {
    if (!is_terminal(s)) continue;
    for (Action a = 0; a < num_actions_; ++a) {
      if (!(transition(s, a) == dirac(Outcome{s, 0.0}))) {
        throw ConfigError("mdp: terminal state " + std::to_string(s) +
                          " must self-loop with reward 0");
      }
    }
  }
  for (const auto& atom : start_) {
    if (atom.value < 0 || atom.value >= num_states_) {
      throw ConfigError("mdp: start state out of range");
    }
  }
  if (labels_.empty()) {
    for (State s = 0; s < num_states_; ++s) labels_.push_back(std::to_string(s));
  }
  if (labels_.size() != n) throw ConfigError("mdp: one label per state");
}

Mdp Mdp::with_gamma(double gamma) const {
  return Mdp(num_states_, num_actions_, transitions_, gamma, terminals_, start_, labels_);
}

Action greedy_action(std::span<const double> row) {
  Action best = 0;
  for (std::size_t a = 1; a < row.size(); ++a) {
    if (row[a] > row[static_cast<std::size_t>(best)]) best = static_cast<Action>(a);
  }
  return best;
}

FiniteDist<Action> epsilon_greedy_distribution(std::span<const double> row,
                                               double epsilon) {
  const Action greedy = greedy_action(row);
  const double explore = epsilon / static_cast<double>(row.size());
  std::vector<Atom<Action>> atoms;
  atoms.reserve(row.size());
  for (std::size_t a = 0; a < row.size(); ++a) {
    const auto action = static_cast<Action>(a);
    atoms.push_back({action, action == greedy ? (1.0 - epsilon) + explore : explore});
  }
  return FiniteDist<Action>(std::move(atoms));
}

FiniteDist<Action> softmax_distribution(std::span<const double> row, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be > 0");
  const double top = *std::max_element(row.begin(), row.end());
  std::vector<double> w(row.size());
  double total = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) {
    w[a] = std::exp((row[a] - top) / temperature);
    total += w[a];
  }
  std::vector<Atom<Action>> atoms;
  for (std::size_t a = 0; a < row.size(); ++a) {
    atoms.push_back({static_cast<Action>(a), w[a] / total});
  }
  return FiniteDist<Action>(std::move(atoms));
}

Policy::Policy(EpsilonGreedy p) : rep_(std::move(p)) {
  const double eps = std::get<EpsilonGreedy>(rep_).epsilon;
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
}

Policy::Policy(Softmax p) : rep_(std::move(p)) {
  if (!(std::get<Softmax>(rep_).temperature > 0.0)) {
    throw ConfigError("softmax temperature must be > 0");
  }
}

FiniteDist<Action> Policy::action_distribution(State s) const {
  const auto i = static_cast<std::size_t>(s);
  struct Visitor {
    std::size_t i;
    State s;
    FiniteDist<Action> operator()(const Deterministic& p) const { return dirac(p.actions[i]); }
    FiniteDist<Action> operator()(const Stochastic& p) const { return p.rows[i]; }
    FiniteDist<Action> operator()(const EpsilonGreedy& p) const {
      return epsilon_greedy_distribution(p.q.row(s), p.epsilon);
    }
    FiniteDist<Action> operator()(const Softmax& p) const {
      return softmax_distribution(p.q.row(s), p.temperature);
    }
  };
  return std::visit(Visitor{i, s}, rep_);
}

std::pair<Action, RngState> sample_action(const Policy& policy, State s, RngState rng) {
  return sample(policy.action_distribution(s), rng);
}

Policy uniform_policy(int num_states, int num_actions) {
  std::vector<Action> actions;
  for (Action a = 0; a < num_actions; ++a) actions.push_back(a);
  const auto row = FiniteDist<Action>::uniform(actions);
  return Policy(Policy::Stochastic{
      std::vector<FiniteDist<Action>>(static_cast<std::size_t>(num_states), row)});
}

}  // namespace catrl
