#pragma once

// Bellman operators as optics, sample targets as parametrised lenses, and the
// update rule Q ← (1 − α)Q + αG.
//
// Policy improvement is deliberately a plain function. It needs the value
// function at every action of a state at once (an argmax over two
// coevaluations), so it cannot be written as K of any optic and none is
// offered here.

#include <iosfwd>
#include <vector>

#include "catrl/mdp.hpp"
#include "catrl/optic.hpp"
#include "catrl/para.hpp"

namespace catrl {

// ℓ_π : (S/ℝ) -> (S/ℝ) with the reward as residual.
using BellmanOptic = optic::StochOptic<double, State, double, State, double>;

// forward  s ↦ bind(π(s), a ↦ t(s, a)) as D(reward × S)
// backward (d_r, v) ↦ 𝔼[d_r] + γv
BellmanOptic bellman_optic(const Mdp& mdp, const Policy& pi);

// K(ℓ_π) applied to V, with terminal states sent to 0.
ValueFn value_improve(const Mdp& mdp, const Policy& pi, const ValueFn& v);

// 𝔼_{(s',r)~t(s,a)}[r + γV(s')] for every (s, a).
QTable action_values(const Mdp& mdp, const ValueFn& v);

// Greedy (lowest-id argmax) deterministic policy against V.
Policy policy_improve(const Mdp& mdp, const ValueFn& v);

// Row reductions used inside targets; each is r-independent and shared by
// every code path that computes a target so the arithmetic is identical.
double max_value(std::span<const double> row);
double expected_value(std::span<const double> row, const FiniteDist<Action>& pi);

// G = r + γ·v, or r alone when the successor is terminal.
inline double bootstrap(double gamma, double r, double v, bool terminal) {
  return terminal ? r : r + gamma * v;
}

QDelta sarsa_target(double gamma, const QTable& q, const SarsaSample& sample);
QDelta q_learning_target(double gamma, const QTable& q, const Transition& t);
QDelta exp_sarsa_target(double gamma, const QTable& q, const Transition& t,
                        const Policy& pi_target);

// G = r₀ + γr₁ + … + γ^{n-1}r_{n-1} + γⁿQ(s_n, a_n), evaluated from the back
// (Horner form). Throws MalformedEpisode on an empty fragment.
QDelta n_step_target(double gamma, const QTable& q, const NStepFragment& fragment);

// Discounted return of the whole episode, credited to its first step.
QDelta mc_target(double gamma, const Episode& episode);

// First-visit return targets, one per distinct (s, a), in episode order.
// Throws MalformedEpisode on an empty episode or non-finite reward.
std::vector<QDelta> mc_first_visit_targets(double gamma, const Episode& episode);

// Q(s,a) ← Q(s,a) + α(G − Q(s,a)); every other entry is untouched. Throws
// DomainError when α ∉ [0, 1] or (s, a) is out of range.
QTable apply_delta(const QTable& q, const QDelta& d, double alpha);

// The delta as a dense matrix: zero except α(G − Q(s,a)) at (s, a).
QTable cotangent_embed(const QDelta& d, const QTable& q, double alpha);

// Parametric Bellman operators. The parameter is the sample, the forward
// pass names the successor to look up, and the backward pass is r, v ↦ r + γv.
using StateAction = std::pair<State, Action>;
using SarsaBellman = para::ParaLens<SarsaSample, Unit, QDelta, StateAction, double>;
using TransitionBellman = para::ParaLens<Transition, Unit, QDelta, State, double>;
using NStepBellman = para::ParaLens<NStepFragment, Unit, QDelta, StateAction, double>;

SarsaBellman para_bellman_sarsa(double gamma);

// One-step transitions; what v means at s' is chosen by the continuation:
// max_a' Q(s', a') gives Q-learning, 𝔼_{π(s')} Q(s', ·) Expected SARSA.
TransitionBellman para_bellman_transition(double gamma);

NStepBellman para_bellman_n_step(double gamma);

// Continuations for the lenses above, reading Q.
inline auto q_lookup(const QTable& q) {
  return [&q](const StateAction& sa) { return q(sa.first, sa.second); };
}
inline auto greedy_lookup(const QTable& q) {
  return [&q](State s) { return max_value(q.row(s)); };
}
template <class PolicyAt>
auto expected_lookup(const QTable& q, PolicyAt pi_at) {
  return [&q, pi_at](State s) { return expected_value(q.row(s), pi_at(s)); };
}

// CSV with header "s,a,q" / "s,v", rows in id order.
void write_csv(std::ostream& out, const QTable& q);
void write_csv(std::ostream& out, const ValueFn& v);

}  // namespace catrl
