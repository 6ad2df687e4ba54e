#pragma once

// Gradient updates for Q-networks and actor-critic pairs.
//
// The squared TD loss L = (netθ(s)[a] − G)² with step θ − (α/2)∇L gives
// θ + α(G − Q)∇Q: α is the same rate the tabular rules use, and with one-hot
// features and a linear net the update touches exactly the (s, a) weight,
// reproducing apply_delta.

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "catrl/approx/network.hpp"
#include "catrl/dist.hpp"
#include "catrl/mdp.hpp"

namespace catrl::approx {

enum class TargetRule { kSarsa, kQLearning, kExpectedSarsa };

// "sarsa", "q_learning", "expected_sarsa"; ConfigError otherwise.
TargetRule target_rule_from_name(std::string_view name);

// G = r + γ·v(s') with v(s') = Q(s', a'), max Q(s', ·), or the expectation
// under the ε-greedy policy of the current net; terminal s' drops the
// bootstrap. Computed from the current θ and held constant afterwards.
double semi_gradient_target(const QNetwork& net, const ParamVector& theta,
                            const SarsaSample& x, double gamma, TargetRule rule,
                            double epsilon = 0.0);

// Δθ = α(G − netθ(s)[a])·∇θ netθ(s)[a].
std::vector<double> semi_gradient_delta(const QNetwork& net, const ParamVector& theta,
                                        const SarsaSample& x, double alpha, double gamma,
                                        TargetRule rule, double epsilon = 0.0);

ParamVector semi_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const SarsaSample& x, double alpha, double gamma,
                                   TargetRule rule, double epsilon = 0.0);
// The (s, a, r, s') form; the SARSA rule needs a' and is rejected.
ParamVector semi_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const Transition& t, double alpha, double gamma,
                                   TargetRule rule, double epsilon = 0.0);

// θ − (α/2)∇θ(netθ(s)[a] − G(θ))² with the gradient also flowing through the
// target. The ε-greedy weights of the expected rule are held fixed.
ParamVector full_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const SarsaSample& x, double alpha, double gamma,
                                   TargetRule rule, double epsilon = 0.0);

// p(a) ∝ exp(netθ(s)[a] / τ).
FiniteDist<Action> softmax_policy(const QNetwork& net, const ParamVector& theta, State s,
                                  double temperature);

// Actor: softmax over its outputs. Critic: a single-output network.
struct ActorCritic {
  QNetwork actor;
  QNetwork critic;
  double temperature = 1.0;

  // Throws DomainError on a critic with more than one output or τ ≤ 0.
  void check() const;
  FiniteDist<Action> policy(const ParamVector& theta, State s) const;
  double value(const ParamVector& omega, State s) const;
};

// ∇θ log πθ(s, a).
std::vector<double> score(const ActorCritic& ac, const ParamVector& theta, State s, Action a);

// θ += α_actor·(r − Vω(s))·∇θ log πθ(s, a);
// ω += α_critic·(r + γVω(s') − Vω(s))·∇ω Vω(s).
std::pair<ParamVector, ParamVector> actor_critic_update(const ActorCritic& ac,
                                                        const ParamVector& theta,
                                                        const ParamVector& omega,
                                                        const Transition& t, double alpha_actor,
                                                        double alpha_critic, double gamma);

// The two deltas without applying them.
std::pair<std::vector<double>, std::vector<double>> actor_critic_delta(
    const ActorCritic& ac, const ParamVector& theta, const ParamVector& omega,
    const Transition& t, double alpha_actor, double alpha_critic, double gamma);

}  // namespace catrl::approx
