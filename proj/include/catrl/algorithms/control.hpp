#pragma once

// Tabular control and prediction, each wired as model ⊗ agent ⊗ environment.
//
// Draw-order contract (the oracles follow it exactly). Every run splits its
// seed into model, agent and environment streams.
//   environment stream: start state once, then per step one transition draw,
//     plus one start-state draw whenever an episode ends.
//   agent stream, one-copy methods (Q-learning, Expected SARSA, MC control,
//     bandits, offline): one action draw per step, at s.
//   agent stream, two-copy methods (SARSA, n-step SARSA): one draw at the
//     first state of an episode, then one draw at s' every step; a' is
//     executed next unless the episode ended.
//   prediction (|A| = 1): no agent draws.
//   model stream: one draw for the initial state; the tabular update rules
//     draw nothing afterwards.

#include <cstdint>
#include <vector>

#include "catrl/algorithms/model.hpp"
#include "catrl/algorithms/report.hpp"

namespace catrl::algorithms {

struct ControlParams {
  double alpha = 0.1;
  double epsilon = 0.1;
  double gamma = 0.9;
  std::uint64_t seed = 0;
  Budget budget = Budget::of_episodes(100);
  int max_episode_length = 0;  // 0: episodes end only at terminals
  double initial_q = 0.0;
  StepSize step_size = StepSize::kConstant;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// ε-greedy deployment; sample (s, a, r, s', a'); target r + γQ(s', a').
TrainReport sarsa(const Mdp& mdp, const ControlParams& p, const StepObserver& observe = {});

// The same method with sample (s, a, r, s'): the model draws a' from its own
// copy of the deployed policy (sharing the agent stream) and commits the
// agent to it.
TrainReport sarsa_internal_policy(const Mdp& mdp, const ControlParams& p,
                                  const StepObserver& observe = {});

// Sample (s, a, r, s'); target r + γ max Q(s', ·).
TrainReport q_learning(const Mdp& mdp, const ControlParams& p, const StepObserver& observe = {});

// Sample (s, a, r, s'); target r + γ 𝔼_{π(s')} Q(s', ·) with π the deployed
// ε-greedy policy.
TrainReport expected_sarsa(const Mdp& mdp, const ControlParams& p,
                           const StepObserver& observe = {});

// n-step SARSA over a sliding window.
TrainReport n_step_sarsa(const Mdp& mdp, int n, const ControlParams& p,
                         const StepObserver& observe = {});

// First-visit Monte Carlo control with constant-α updates applied in episode
// order at every episode end.
TrainReport mc_control(const Mdp& mdp, const ControlParams& p, const StepObserver& observe = {});

// Prediction: the agent has no choice to make (|A| = 1) and is only an
// observer. The Q-table has a single column.
TrainReport td0_run(const Mrp& mrp, const ControlParams& p, const StepObserver& observe = {});
TrainReport mc_prediction_run(const Mrp& mrp, const ControlParams& p,
                              const StepObserver& observe = {});

ValueFn td0_prediction(const Mrp& mrp, std::size_t steps, double alpha, double gamma,
                       std::uint64_t seed, StepSize size = StepSize::kConstant);
ValueFn mc_prediction(const Mrp& mrp, std::size_t episodes, double alpha, double gamma,
                      std::uint64_t seed);

// First column of a Q-table.
ValueFn state_values(const QTable& q);

// Multi-armed bandit: Q has one row, the target is the observed reward.
// `initial_q` gives optimistic starts. The curve is per step.
TrainReport bandit_epsilon_greedy(const BanditComb& env, int num_arms, const ControlParams& p,
                                  const StepObserver& observe = {});

// Contextual bandit: one Q row per context.
TrainReport contextual_bandit_agent(const ContextualComb& env, int num_contexts,
                                    int num_actions, const ControlParams& p,
                                    const StepObserver& observe = {});

// Q-learning against a replayed dataset. The agent still acts (and draws),
// but the logged action is what gets learned from.
TrainReport q_learning_offline(const OfflineComb& env, int num_states, int num_actions,
                               const ControlParams& p, const StepObserver& observe = {});

// Runs `policy` on the MDP for `steps` steps and logs what happened.
std::vector<LoggedStep> log_transitions(const Mdp& mdp, const Policy& policy, std::size_t steps,
                                        EpisodeMode mode, std::uint64_t seed);

// Follows the greedy policy of q from the most likely start state.
Episode greedy_rollout(const Mdp& mdp, const QTable& q, int max_length);

}  // namespace catrl::algorithms
