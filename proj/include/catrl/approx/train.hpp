#pragma once

// DQN-style and actor-critic training, wired like the tabular methods: a
// model lens (deploy a policy from the parameters, learn a parameter delta
// from a sample), a plain SGD update rule, and the same agent/environment
// loop and draw-order contract. Parameter initialization draws from its own
// stream, so it does not shift any other draw.

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "catrl/algorithms/report.hpp"
#include "catrl/approx/updates.hpp"

namespace catrl::approx {

struct ApproxParams {
  double alpha = 0.1;
  double epsilon = 0.1;
  double gamma = 0.9;
  std::uint64_t seed = 0;
  algorithms::Budget budget = algorithms::Budget::of_episodes(100);
  int max_episode_length = 0;
  TargetRule rule = TargetRule::kQLearning;
  double init_scale = 0.1;  // 0 starts from all-zero parameters

  void validate() const;
};

struct ActorCriticParams {
  double alpha_actor = 0.1;
  double alpha_critic = 0.1;
  double gamma = 0.9;
  std::uint64_t seed = 0;
  algorithms::Budget budget = algorithms::Budget::of_steps(5000);
  int max_episode_length = 0;
  double init_scale = 0.1;

  void validate() const;
};

struct ApproxReport {
  // report.q holds netθ(s)[a] (the actor's logits for actor-critic).
  algorithms::TrainReport report;
  ParamVector theta;
  std::optional<ParamVector> omega;
};

// ε-greedy on netθ, semi-gradient updates with the chosen target rule. The
// SARSA rule runs the two-copy loop; the others act once per step.
ApproxReport dqn_train(const Mdp& mdp, const QNetwork& net, const ApproxParams& p,
                       const algorithms::StepObserver& observe = {});

// Samples from the softmax actor; the critic supplies the baseline.
ApproxReport actor_critic_train(const Mdp& mdp, const ActorCritic& ac,
                                const ActorCriticParams& p,
                                const algorithms::StepObserver& observe = {});

// Header "block,index,value"; one row per parameter, blocks in layout order.
void write_params_csv(std::ostream& out, const ParamVector& theta);

}  // namespace catrl::approx
