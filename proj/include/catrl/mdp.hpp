#pragma once

// Markov decision and reward processes, policies, and the samples that agents
// report back to models.

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "catrl/dist.hpp"
#include "catrl/values.hpp"

namespace catrl {

// One draw of the joint transition/reward kernel.
struct Outcome {
  State next;
  double reward;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

class Mdp {
 public:
  // `transitions` is indexed by s * num_actions + a. Throws ConfigError when
  // gamma is outside [0, 1], an id is out of range, or a terminal state does
  // not loop to itself with reward 0.
  Mdp(int num_states, int num_actions, std::vector<FiniteDist<Outcome>> transitions,
      double gamma, std::vector<bool> terminals, FiniteDist<State> start,
      std::vector<std::string> state_labels = {});

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double gamma() const { return gamma_; }
  bool is_terminal(State s) const { return terminals_[static_cast<std::size_t>(s)]; }
  const FiniteDist<State>& start() const { return start_; }
  const FiniteDist<Outcome>& transition(State s, Action a) const {
    return transitions_[static_cast<std::size_t>(s * num_actions_ + a)];
  }
  // A reward process is a decision process with a single action.
  bool is_reward_process() const { return num_actions_ == 1; }
  const std::string& label(State s) const { return labels_[static_cast<std::size_t>(s)]; }

  Mdp with_gamma(double gamma) const;

 private:
  int num_states_;
  int num_actions_;
  std::vector<FiniteDist<Outcome>> transitions_;
  double gamma_;
  std::vector<bool> terminals_;
  FiniteDist<State> start_;
  std::vector<std::string> labels_;
};

using Mrp = Mdp;

// Lowest-id argmax.
Action greedy_action(std::span<const double> row);

// Greedy action with probability 1 - ε + ε/|A|, every other action ε/|A|;
// support in ascending action order.
FiniteDist<Action> epsilon_greedy_distribution(std::span<const double> row, double epsilon);

// p(a) ∝ exp(row[a] / temperature), max-subtracted.
FiniteDist<Action> softmax_distribution(std::span<const double> row, double temperature);

class Policy {
 public:
  struct Deterministic {
    std::vector<Action> actions;
  };
  struct Stochastic {
    std::vector<FiniteDist<Action>> rows;
  };
  struct EpsilonGreedy {
    QTable q;
    double epsilon;
  };
  struct Softmax {
    QTable q;
    double temperature;
  };

  Policy(Deterministic p) : rep_(std::move(p)) {}
  Policy(Stochastic p) : rep_(std::move(p)) {}
  Policy(EpsilonGreedy p);
  Policy(Softmax p);

  FiniteDist<Action> action_distribution(State s) const;

  const Deterministic* as_deterministic() const {
    return std::get_if<Deterministic>(&rep_);
  }

 private:
  std::variant<Deterministic, Stochastic, EpsilonGreedy, Softmax> rep_;
};

// One draw from the policy's action distribution at s.
std::pair<Action, RngState> sample_action(const Policy& policy, State s, RngState rng);

Policy uniform_policy(int num_states, int num_actions);

// (s, a, r, s'); `terminal` marks s' as terminal so targets drop the
// bootstrap term.
struct Transition {
  State s;
  Action a;
  double r;
  State next;
  bool terminal = false;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// (s, a, r, s', a').
struct SarsaSample {
  State s;
  Action a;
  double r;
  State next;
  Action next_action;
  bool terminal = false;
  friend bool operator==(const SarsaSample&, const SarsaSample&) = default;
};

struct EpisodeStep {
  State s;
  Action a;
  double r;
  friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

// A whole episode; `terminal` is false when it was cut at the length cap.
struct Episode {
  std::vector<EpisodeStep> steps;
  State final_state = 0;
  bool terminal = true;
};

// (s, a, r₀, …, r_{k-1}) with an optional bootstrap pair (s_k, a_k).
struct NStepFragment {
  State s;
  Action a;
  std::vector<double> rewards;
  State last_state = 0;
  Action last_action = 0;
  bool bootstrap = true;
};

}  // namespace catrl
