#include "catrl/algorithms/control.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "catrl/csv.hpp"
#include "catrl/errors.hpp"

namespace catrl::algorithms {
namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

void check_unit_interval(double x, const std::string& field) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ConfigError(field + " must lie in [0, 1], got " + format_number(x));
  }
}

QTable initial_table(const Mdp& mdp, double fill) {
  QTable q(mdp.num_states(), mdp.num_actions(), fill);
  for (State s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.is_terminal(s)) continue;
    for (Action a = 0; a < mdp.num_actions(); ++a) q(s, a) = 0.0;
  }
  return q;
}

ModelLens<QTable, QDelta, SarsaSample> sarsa_model(const ControlParams& p) {
  return {[eps = p.epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, eps}); },
          [k = para::para_K(para_bellman_sarsa(p.gamma))](const QTable& q,
                                                            const SarsaSample& x) {
            return k(x, Unit{}, q_lookup(q));
          }};
}

ModelLens<QTable, QDelta, Transition> q_learning_model(const ControlParams& p) {
  return {[eps = p.epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, eps}); },
          [k = para::para_K(para_bellman_transition(p.gamma))](const QTable& q,
                                                               const Transition& t) {
            return k(t, Unit{}, greedy_lookup(q));
          }};
}

ModelLens<QTable, QDelta, Transition> expected_sarsa_model(const ControlParams& p) {
  return {[eps = p.epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, eps}); },
          [k = para::para_K(para_bellman_transition(p.gamma)), eps = p.epsilon](
              const QTable& q, const Transition& t) {
            const auto pi_target = [&q, eps](State s) {
              return epsilon_greedy_distribution(q.row(s), eps);
            };
            return k(t, Unit{}, expected_lookup(q, pi_target));
          }};
}

// What the observer needs from one step of any comb.
struct StepFacts {
  State s;
  Action a;
  double reward;
  State next;
  bool end;
};

StepFacts facts_of(State s, Action, const Feedback& f) {
  return {s, f.action, f.reward, f.next, f.episode_end};
}
StepFacts facts_of(Unit, Action a, double r) { return {0, a, r, 0, true}; }
StepFacts facts_of(State s, Action a, double r) { return {s, a, r, s, true}; }

// A one-copy agent in a 3-hole comb, run through close_loop.
template <class ME, class MEp, class X, class Yp, class Sample, class TargetAction>
TrainReport run_one_copy(const iteration::EnvComb<ME, MEp, X, Unit, Action, Yp>& env,
                         const ModelLens<QTable, QDelta, Sample>& model,
                         const UpdateRule<VisitCounts, QTable, QDelta>& rule,
                         const iteration::ParaAgent<Policy, Sample, X, Action, Yp>& agent,
                         CurveUnit unit, const ControlParams& p, TargetAction target_action,
                         const StepObserver& observe) {
  const auto it = model_iteration(model, rule);
  CurveBuilder curve(unit, rule.init);
  QTable before = rule.init;
  const auto final_state = iteration::close_loop(
      it, agent, env, kUnbounded, LoopRngs::from_seed(p.seed), [&](const auto& step) {
        const QTable& q = parameters(step.model_state);
        const StepFacts facts = facts_of(step.x, step.y, step.yp);
        curve.record(facts.reward, facts.end, q);
        if (observe) {
          observe(StepTrace{step.t, facts.s, facts.a, facts.reward, facts.next, facts.end,
                            target_action(before, step.sample), q});
          before = q;
        }
        return !p.budget.reached(curve.episodes(), curve.steps());
      });
  return {unit, curve.take(), parameters(final_state.model), curve.steps(), p.seed};
}

iteration::ParaAgent<Policy, Transition, State, Action, Feedback> transition_agent(ActFn act) {
  return {[act = std::move(act)](const Policy& pi, const State& s, RngState rng) {
            return act(pi, s, rng);
          },
          [](const Policy&, const State& s, const Action&, const Feedback& f) {
            return Transition{s, f.action, f.reward, f.next, f.terminal};
          }};
}

std::pair<Action, RngState> no_choice(const Policy&, State, RngState rng) { return {0, rng}; }

Action greedy_successor(const QTable& q, const Transition& t) {
  return greedy_action(q.row(t.next));
}
Action no_successor(const QTable&, const auto&) { return -1; }

// A two-copy (or episode-collecting) agent over the MDP comb.
template <class Sample, class Delta, class Assemble, class TargetAction>
TrainReport run_unrolled(const Mdp& mdp, const ControlParams& p,
                         const ModelLens<QTable, Delta, Sample>& model,
                         const UpdateRule<VisitCounts, QTable, Delta>& rule, const ActFn& act,
                         bool second_copy, Assemble assemble, TargetAction target_action,
                         const StepObserver& observe) {
  const auto it = model_iteration(model, rule);
  CurveBuilder curve(CurveUnit::kEpisode, rule.init);
  const auto final_state = run_loop_2(
      it, mdp_to_comb(mdp, EpisodeMode{p.max_episode_length}), act, second_copy,
      LoopRngs::from_seed(p.seed), assemble,
      [&](std::size_t t, const TwoCopyStep& step, const auto& state) {
        const QTable& q = parameters(state);
        curve.record(step.f.reward, step.f.episode_end, q);
        if (observe) {
          observe(StepTrace{t, step.s, step.a, step.f.reward, step.f.next, step.f.episode_end,
                            target_action(step), q});
        }
        return !p.budget.reached(curve.episodes(), curve.steps());
      });
  return {CurveUnit::kEpisode, curve.take(), parameters(final_state), curve.steps(), p.seed};
}

std::vector<SarsaSample> sarsa_sample(const TwoCopyStep& x) {
  return {SarsaSample{x.s, x.a, x.f.reward, x.f.next, x.next_action, x.f.terminal}};
}

void check_prediction(const Mrp& mrp) {
  if (!mrp.is_reward_process()) throw ConfigError("prediction needs a reward process (|A| = 1)");
}

}  // namespace

void ControlParams::validate() const {
  if (step_size == StepSize::kConstant) check_unit_interval(alpha, "alpha");
  check_unit_interval(epsilon, "epsilon");
  check_unit_interval(gamma, "gamma");
  if (max_episode_length < 0) throw ConfigError("max_episode_length must be >= 0");
  if (!std::isfinite(initial_q)) throw ConfigError("initial_q must be finite");
  budget.validate();
}

UpdateRule<VisitCounts, QTable, QDelta> tabular_rule(QTable q0, double alpha, StepSize size) {
  VisitCounts counts;
  if (size == StepSize::kInverseVisits) {
    counts.n.assign(static_cast<std::size_t>(q0.num_states() * q0.num_actions()), 0);
  }
  return {std::move(counts), std::move(q0),
          [alpha, size](const VisitCounts& c, const QTable& q, const QDelta& d) {
            if (size == StepSize::kConstant) return std::pair{c, apply_delta(q, d, alpha)};
            VisitCounts next = c;
            const int n = ++next.n[static_cast<std::size_t>(d.s * q.num_actions() + d.a)];
            return std::pair{std::move(next), apply_delta(q, d, 1.0 / static_cast<double>(n))};
          }};
}

UpdateRule<VisitCounts, QTable, std::vector<QDelta>> tabular_batch_rule(QTable q0, double alpha,
                                                                        StepSize size) {
  auto single = tabular_rule(std::move(q0), alpha, size);
  return {single.internal, single.init,
          [step = single.step](const VisitCounts& c, const QTable& q,
                               const std::vector<QDelta>& ds) {
            std::pair<VisitCounts, QTable> acc{c, q};
            for (const QDelta& d : ds) acc = step(acc.first, acc.second, d);
            return acc;
          }};
}

std::vector<NStepFragment> NStepWindow::push(const TwoCopyStep& step) {
  window_.push_back({step.s, step.a, step.f.reward});
  std::vector<NStepFragment> out;
  if (step.f.episode_end) {
    for (std::size_t i = 0; i < window_.size(); ++i) {
      out.push_back(fragment_from(i, step, !step.f.terminal));
    }
    window_.clear();
  } else if (window_.size() == static_cast<std::size_t>(n_)) {
    out.push_back(fragment_from(0, step, true));
    window_.pop_front();
  }
  return out;
}

NStepFragment NStepWindow::fragment_from(std::size_t start, const TwoCopyStep& last,
                                         bool bootstrap) const {
  NStepFragment f{window_[start].s, window_[start].a, {}, last.f.next, last.next_action,
                  bootstrap};
  for (std::size_t i = start; i < window_.size(); ++i) f.rewards.push_back(window_[i].r);
  return f;
}

std::vector<Episode> EpisodeCollector::push(const TwoCopyStep& step) {
  current_.steps.push_back({step.s, step.a, step.f.reward});
  if (!step.f.episode_end) return {};
  current_.final_state = step.f.next;
  current_.terminal = step.f.terminal;
  std::vector<Episode> out{std::move(current_)};
  current_ = Episode{};
  return out;
}

TrainReport sarsa(const Mdp& mdp, const ControlParams& p, const StepObserver& observe) {
  p.validate();
  return run_unrolled(mdp, p, sarsa_model(p),
                      tabular_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size),
                      act_on_policy, true, sarsa_sample,
                      [](const TwoCopyStep& x) { return x.next_action; }, observe);
}

TrainReport sarsa_internal_policy(const Mdp& mdp, const ControlParams& p,
                                  const StepObserver& observe) {
  p.validate();
  const auto lens = para::para_K(para_bellman_sarsa(p.gamma));
  const auto update = as_iteration(
      tabular_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size));
  const auto deploy = [eps = p.epsilon](const QTable& q) {
    return Policy(Policy::EpsilonGreedy{q, eps});
  };

  // The model's state: the update rule's state and the a' it committed to.
  using RuleState = std::pair<VisitCounts, QTable>;
  struct ModelState {
    RuleState rule;
    Action committed;
  };
  const iteration::IterationData<ModelState, Policy, Transition> model{
      pushforward(update.initial,
                  [&](const std::pair<RuleState, QTable>& init) {
                    return std::pair<ModelState, Policy>{ModelState{init.first, 0},
                                                         deploy(init.second)};
                  }),
      [&](const ModelState& m, const Transition& t, RngState rng) {
        const QTable& q = m.rule.second;
        const auto [a_next, after] = sample_action(deploy(q), t.next, rng);
        const QDelta d =
            lens(SarsaSample{t.s, t.a, t.r, t.next, a_next, t.terminal}, Unit{}, q_lookup(q));
        auto stepped = update.iterator(m.rule, d, after);
        return iteration::Emit<ModelState, Policy>{ModelState{stepped.state, a_next},
                                                   deploy(stepped.out), stepped.rng};
      }};

  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  const MdpComb env = mdp_to_comb(mdp, EpisodeMode{p.max_episode_length});
  auto [mp, model_rng] = sample(model.initial, rngs.model);
  (void)model_rng;  // the internal policy draws from the agent's stream
  auto [ex, env_rng] = sample(env.init, rngs.env);
  ModelState state = std::move(mp.first);
  Policy pi = std::move(mp.second);
  EnvCursor cursor = ex.first;
  State s = ex.second;
  RngState agent_rng = rngs.agent;
  std::optional<Action> pending;
  CurveBuilder curve(CurveUnit::kEpisode, state.rule.second);
  for (std::size_t t = 0;; ++t) {
    Action a;
    if (pending) {
      a = *pending;
    } else {
      std::tie(a, agent_rng) = act_on_policy(pi, s, agent_rng);
    }
    auto answer = env.continuation(cursor, a, env_rng);
    const Feedback& f = answer.out;
    auto updated = model.iterator(state, Transition{s, a, f.reward, f.next, f.terminal},
                                  agent_rng);
    state = std::move(updated.state);
    pi = std::move(updated.out);
    agent_rng = updated.rng;
    const QTable& q = state.rule.second;
    curve.record(f.reward, f.episode_end, q);
    if (observe) {
      observe(StepTrace{t, s, a, f.reward, f.next, f.episode_end, state.committed, q});
    }
    auto next = env.step(answer.state, Unit{}, answer.rng);
    cursor = next.state;
    s = next.out;
    env_rng = next.rng;
    pending = f.episode_end ? std::nullopt : std::optional<Action>(state.committed);
    if (p.budget.reached(curve.episodes(), curve.steps())) break;
  }
  return {CurveUnit::kEpisode, curve.take(), state.rule.second, curve.steps(), p.seed};
}

TrainReport q_learning(const Mdp& mdp, const ControlParams& p, const StepObserver& observe) {
  p.validate();
  return run_one_copy(mdp_to_comb(mdp, EpisodeMode{p.max_episode_length}), q_learning_model(p),
                      tabular_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size),
                      transition_agent(act_on_policy), CurveUnit::kEpisode, p,
                      greedy_successor, observe);
}

TrainReport expected_sarsa(const Mdp& mdp, const ControlParams& p, const StepObserver& observe) {
  p.validate();
  return run_one_copy(mdp_to_comb(mdp, EpisodeMode{p.max_episode_length}),
                      expected_sarsa_model(p),
                      tabular_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size),
                      transition_agent(act_on_policy), CurveUnit::kEpisode, p,
                      no_successor<Transition>, observe);
}

TrainReport n_step_sarsa(const Mdp& mdp, int n, const ControlParams& p,
                         const StepObserver& observe) {
  p.validate();
  if (n < 1) throw ConfigError("n must be >= 1");
  const ModelLens<QTable, QDelta, NStepFragment> model{
      [eps = p.epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, eps}); },
      [k = para::para_K(para_bellman_n_step(p.gamma))](const QTable& q,
                                                       const NStepFragment& f) {
        return k(f, Unit{}, q_lookup(q));
      }};
  NStepWindow window(n);
  return run_unrolled(mdp, p, model,
                      tabular_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size),
                      act_on_policy, true,
                      [&window](const TwoCopyStep& x) { return window.push(x); },
                      [n](const TwoCopyStep& x) { return n == 1 ? x.next_action : -1; },
                      observe);
}

namespace {

TrainReport run_monte_carlo(const Mdp& mdp, const ControlParams& p, const ActFn& act,
                            const StepObserver& observe) {
  const ModelLens<QTable, std::vector<QDelta>, Episode> model{
      [eps = p.epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, eps}); },
      [gamma = p.gamma](const QTable&, const Episode& e) {
        return mc_first_visit_targets(gamma, e);
      }};
  EpisodeCollector collector;
  return run_unrolled(mdp, p, model,
                      tabular_batch_rule(initial_table(mdp, p.initial_q), p.alpha, p.step_size),
                      act, false,
                      [&collector](const TwoCopyStep& x) { return collector.push(x); },
                      [](const TwoCopyStep&) { return Action{-1}; }, observe);
}

}  // namespace

TrainReport mc_control(const Mdp& mdp, const ControlParams& p, const StepObserver& observe) {
  p.validate();
  return run_monte_carlo(mdp, p, act_on_policy, observe);
}

TrainReport td0_run(const Mrp& mrp, const ControlParams& p, const StepObserver& observe) {
  p.validate();
  check_prediction(mrp);
  return run_one_copy(mdp_to_comb(mrp, EpisodeMode{p.max_episode_length}), q_learning_model(p),
                      tabular_rule(initial_table(mrp, p.initial_q), p.alpha, p.step_size),
                      transition_agent(no_choice), CurveUnit::kEpisode, p,
                      no_successor<Transition>, observe);
}

TrainReport mc_prediction_run(const Mrp& mrp, const ControlParams& p,
                              const StepObserver& observe) {
  p.validate();
  check_prediction(mrp);
  return run_monte_carlo(mrp, p, no_choice, observe);
}

ValueFn state_values(const QTable& q) {
  ValueFn v(q.num_states());
  for (State s = 0; s < q.num_states(); ++s) v[s] = q(s, 0);
  return v;
}

ValueFn td0_prediction(const Mrp& mrp, std::size_t steps, double alpha, double gamma,
                       std::uint64_t seed, StepSize size) {
  ControlParams p;
  p.alpha = alpha;
  p.gamma = gamma;
  p.seed = seed;
  p.budget = Budget::of_steps(steps);
  p.step_size = size;
  return state_values(td0_run(mrp, p).q);
}

ValueFn mc_prediction(const Mrp& mrp, std::size_t episodes, double alpha, double gamma,
                      std::uint64_t seed) {
  ControlParams p;
  p.alpha = alpha;
  p.gamma = gamma;
  p.seed = seed;
  p.budget = Budget::of_episodes(episodes);
  return state_values(mc_prediction_run(mrp, p).q);
}

namespace {

ModelLens<QTable, QDelta, EpisodeStep> reward_model(double epsilon) {
  return {[epsilon](const QTable& q) { return Policy(Policy::EpsilonGreedy{q, epsilon}); },
          [](const QTable&, const EpisodeStep& x) { return QDelta{x.s, x.a, x.r}; }};
}

}  // namespace

TrainReport bandit_epsilon_greedy(const BanditComb& env, int num_arms, const ControlParams& p,
                                  const StepObserver& observe) {
  p.validate();
  if (num_arms < 1) throw ConfigError("num_arms must be >= 1");
  const iteration::ParaAgent<Policy, EpisodeStep, Unit, Action, double> agent{
      [](const Policy& pi, const Unit&, RngState rng) { return sample_action(pi, 0, rng); },
      [](const Policy&, const Unit&, const Action& a, const double& r) {
        return EpisodeStep{0, a, r};
      }};
  return run_one_copy(env, reward_model(p.epsilon),
                      tabular_rule(QTable(1, num_arms, p.initial_q), p.alpha, p.step_size),
                      agent, CurveUnit::kStep, p, no_successor<EpisodeStep>, observe);
}

TrainReport contextual_bandit_agent(const ContextualComb& env, int num_contexts,
                                    int num_actions, const ControlParams& p,
                                    const StepObserver& observe) {
  p.validate();
  if (num_contexts < 1 || num_actions < 1) throw ConfigError("need contexts and actions");
  const iteration::ParaAgent<Policy, EpisodeStep, State, Action, double> agent{
      [](const Policy& pi, const State& s, RngState rng) { return sample_action(pi, s, rng); },
      [](const Policy&, const State& s, const Action& a, const double& r) {
        return EpisodeStep{s, a, r};
      }};
  return run_one_copy(
      env, reward_model(p.epsilon),
      tabular_rule(QTable(num_contexts, num_actions, p.initial_q), p.alpha, p.step_size), agent,
      CurveUnit::kStep, p, no_successor<EpisodeStep>, observe);
}

TrainReport q_learning_offline(const OfflineComb& env, int num_states, int num_actions,
                               const ControlParams& p, const StepObserver& observe) {
  p.validate();
  return run_one_copy(env, q_learning_model(p),
                      tabular_rule(QTable(num_states, num_actions, p.initial_q), p.alpha,
                                   p.step_size),
                      transition_agent(act_on_policy), CurveUnit::kEpisode, p,
                      greedy_successor, observe);
}

std::vector<LoggedStep> log_transitions(const Mdp& mdp, const Policy& policy, std::size_t steps,
                                        EpisodeMode mode, std::uint64_t seed) {
  const LoopRngs rngs = LoopRngs::from_seed(seed);
  const MdpComb env = mdp_to_comb(mdp, mode);
  std::vector<LoggedStep> log;
  log.reserve(steps);
  auto [mx, env_rng] = sample(env.init, rngs.env);
  EnvCursor cursor = mx.first;
  State s = mx.second;
  RngState agent_rng = rngs.agent;
  for (std::size_t t = 0; t < steps; ++t) {
    Action a;
    std::tie(a, agent_rng) = sample_action(policy, s, agent_rng);
    auto answer = env.continuation(cursor, a, env_rng);
    log.push_back({s, a, answer.out});
    auto next = env.step(answer.state, Unit{}, answer.rng);
    cursor = next.state;
    s = next.out;
    env_rng = next.rng;
  }
  return log;
}

Episode greedy_rollout(const Mdp& mdp, const QTable& q, int max_length) {
  const auto most_likely = [](const auto& dist) {
    const auto* best = &*dist.begin();
    for (const auto& atom : dist) {
      if (atom.weight > best->weight) best = &atom;
    }
    return best->value;
  };
  Episode e;
  State s = most_likely(mdp.start());
  e.terminal = false;
  for (int t = 0; t < max_length && !mdp.is_terminal(s); ++t) {
    const Action a = greedy_action(q.row(s));
    const Outcome o = most_likely(mdp.transition(s, a));
    e.steps.push_back({s, a, o.reward});
    s = o.next;
  }
  e.final_state = s;
  e.terminal = mdp.is_terminal(s);
  return e;
}

}  // namespace catrl::algorithms
