#pragma once

// Models, update rules, and the two-copy agent loop.
//
// A model is a lens (Θ/ΔΘ) -> (Policy/Sample): forward deploys a policy from
// the parameters, backward turns a sample into a parameter delta. An update
// rule is an iteration (Θ/ΔΘ) whose iterator applies deltas. Applying the
// iteration functor to the model lens gives an iteration over the agent
// interface (Policy/Sample), which is what the training loops run.

#include <deque>
#include <functional>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "catrl/bellman.hpp"
#include "catrl/environments.hpp"
#include "catrl/iteration.hpp"

namespace catrl::algorithms {

template <class Theta, class Delta, class Sample>
struct ModelLens {
  std::function<Policy(const Theta&)> deploy;
  std::function<Delta(const Theta&, const Sample&)> learn;

  optic::Lens<Theta, Delta, Policy, Sample> lens() const { return {deploy, learn}; }
};

template <class Internal, class Theta, class Delta>
struct UpdateRule {
  Internal internal;
  Theta init;
  std::function<std::pair<Internal, Theta>(const Internal&, const Theta&, const Delta&)> step;
};

// The update rule as an element of I(Θ/ΔΘ); its state carries the current
// parameters next to the rule's internal state.
template <class Internal, class Theta, class Delta>
iteration::IterationData<std::pair<Internal, Theta>, Theta, Delta> as_iteration(
    const UpdateRule<Internal, Theta, Delta>& rule) {
  using S = std::pair<Internal, Theta>;
  return {dirac(std::pair<S, Theta>{S{rule.internal, rule.init}, rule.init}),
          [step = rule.step](const S& s, const Delta& d, RngState rng) {
            auto [internal, theta] = step(s.first, s.second, d);
            Theta out = theta;
            return iteration::Emit<S, Theta>{S{std::move(internal), std::move(theta)},
                                             std::move(out), rng};
          }};
}

// I(model)(rule). The state is ((internal, Θ), Θ): the second Θ is the
// lens residual, i.e. the parameters the deployed policy came from.
template <class Internal, class Theta, class Delta, class Sample>
auto model_iteration(const ModelLens<Theta, Delta, Sample>& model,
                     const UpdateRule<Internal, Theta, Delta>& rule) {
  return iteration::iter_map(model.lens(), as_iteration(rule));
}

template <class MM>
const auto& parameters(const MM& model_state) {
  return model_state.second;
}

enum class StepSize { kConstant, kInverseVisits };

// Visit counts per (s, a); empty for constant step sizes.
struct VisitCounts {
  std::vector<int> n;
};

// Q ← Q + α(G − Q) per delta, in order. With kInverseVisits, α = 1/n(s, a).
UpdateRule<VisitCounts, QTable, QDelta> tabular_rule(QTable q0, double alpha, StepSize size);
UpdateRule<VisitCounts, QTable, std::vector<QDelta>> tabular_batch_rule(QTable q0, double alpha,
                                                                        StepSize size);

// What the two agent copies saw at one environment step: (s, a) from the
// first, the feedback, and a' ~ π(s') from the second.
struct TwoCopyStep {
  State s;
  Action a;
  Feedback f;
  Action next_action;
};

using ActFn = std::function<std::pair<Action, RngState>(const Policy&, State, RngState)>;

// Samples the deployed policy (one agent draw).
inline std::pair<Action, RngState> act_on_policy(const Policy& pi, State s, RngState rng) {
  return sample_action(pi, s, rng);
}

// The 2-hole unrolling of an MDP comb. Per step: the first agent copy acts at
// s (or replays the pending a'), the environment answers, the second copy
// acts at s' (agent draw) when `second_copy` is set, the assembler turns the
// step into zero or more model samples, the model iterates once per sample,
// the observer sees the step, and the environment steps. a' becomes the next
// executed action unless the episode ended. The observer returns false to
// stop.
template <class MM, class Sample, class Assemble, class Observer>
MM run_loop_2(const iteration::IterationData<MM, Policy, Sample>& model, const MdpComb& env,
              const ActFn& act, bool second_copy, LoopRngs rngs, Assemble&& assemble,
              Observer&& observe) {
  auto [mp, model_rng] = sample(model.initial, rngs.model);
  auto [ex, env_rng] = sample(env.init, rngs.env);
  MM state = std::move(mp.first);
  Policy pi = std::move(mp.second);
  EnvCursor cursor = ex.first;
  State s = ex.second;
  RngState agent_rng = rngs.agent;
  std::optional<Action> pending;
  for (std::size_t t = 0;; ++t) {
    Action a;
    if (pending) {
      a = *pending;
    } else {
      std::tie(a, agent_rng) = act(pi, s, agent_rng);
    }
    auto answer = env.continuation(cursor, a, env_rng);
    const Feedback& f = answer.out;
    Action next_action = 0;
    if (second_copy) std::tie(next_action, agent_rng) = act(pi, f.next, agent_rng);
    const TwoCopyStep record{s, a, f, next_action};
    for (const Sample& x : assemble(record)) {
      auto updated = model.iterator(state, x, model_rng);
      state = std::move(updated.state);
      pi = std::move(updated.out);
      model_rng = updated.rng;
    }
    const bool more = observe(t, record, state);
    auto next = env.step(answer.state, Unit{}, answer.rng);
    cursor = next.state;
    s = next.out;
    env_rng = next.rng;
    pending = second_copy && !f.episode_end ? std::optional<Action>(next_action) : std::nullopt;
    if (!more) break;
  }
  return state;
}

// Sliding window of n steps producing n-step fragments; at an episode end
// every pending window start is flushed, bootstrapping only on a cut.
class NStepWindow {
 public:
  explicit NStepWindow(int n) : n_(n) {}
  std::vector<NStepFragment> push(const TwoCopyStep& step);

 private:
  NStepFragment fragment_from(std::size_t start, const TwoCopyStep& last, bool bootstrap) const;

  int n_;
  std::deque<EpisodeStep> window_;
};

// Collects whole episodes.
class EpisodeCollector {
 public:
  std::vector<Episode> push(const TwoCopyStep& step);

 private:
  Episode current_;
};

}  // namespace catrl::algorithms
