#include "catrl/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include "catrl/csv.hpp"
#include "catrl/errors.hpp"

namespace catrl {
namespace {

void check_index(const QTable& q, State s, Action a) {
  if (s < 0 || s >= q.num_states() || a < 0 || a >= q.num_actions()) {
    throw DomainError("(s, a) = (" + std::to_string(s) + ", " + std::to_string(a) +
                      ") outside the Q-table");
  }
}

// r₀ + γ(r₁ + γ(… + γ·tail)).
double discounted_sum(double gamma, const std::vector<double>& rewards, double tail) {
  double g = tail;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
  return g;
}

}  // namespace

BellmanOptic bellman_optic(const Mdp& mdp, const Policy& pi) {
  auto forward = [mdp, pi](const State& s) {
    return catrl::bind(pi.action_distribution(s), [&](const Action& a) {
      return pushforward(mdp.transition(s, a), [](const Outcome& o) {
        return std::pair<double, State>{o.reward, o.next};
      });
    });
  };
  auto backward = [gamma = mdp.gamma()](const FiniteDist<double>& rewards, const double& v) {
    return expectation(rewards) + gamma * v;
  };
  return {std::move(forward), std::move(backward)};
}

ValueFn value_improve(const Mdp& mdp, const Policy& pi, const ValueFn& v) {
  const auto operator_k =
      optic::apply_continuation(bellman_optic(mdp, pi), [&v](const State& s) { return v[s]; });
  ValueFn out(mdp.num_states());
  for (State s = 0; s < mdp.num_states(); ++s) {
    out[s] = mdp.is_terminal(s) ? 0.0 : operator_k(s);
  }
  return out;
}

QTable action_values(const Mdp& mdp, const ValueFn& v) {
  QTable q(mdp.num_states(), mdp.num_actions());
  for (State s = 0; s < mdp.num_states(); ++s) {
    for (Action a = 0; a < mdp.num_actions(); ++a) {
      q(s, a) = expect(mdp.transition(s, a),
                       [&](const Outcome& o) { return o.reward + mdp.gamma() * v[o.next]; });
    }
  }
  return q;
}

Policy policy_improve(const Mdp& mdp, const ValueFn& v) {
  const QTable q = action_values(mdp, v);
  std::vector<Action> actions(static_cast<std::size_t>(mdp.num_states()), 0);
  for (State s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.is_terminal(s)) actions[static_cast<std::size_t>(s)] = greedy_action(q.row(s));
  }
  return Policy(Policy::Deterministic{std::move(actions)});
}

double max_value(std::span<const double> row) {
  return *std::max_element(row.begin(), row.end());
}

double expected_value(std::span<const double> row, const FiniteDist<Action>& pi) {
  double total = 0.0;
  for (const auto& atom : pi) total += atom.weight * row[static_cast<std::size_t>(atom.value)];
  return total;
}

QDelta sarsa_target(double gamma, const QTable& q, const SarsaSample& x) {
  check_index(q, x.s, x.a);
  const double v = x.terminal ? 0.0 : q(x.next, x.next_action);
  return {x.s, x.a, bootstrap(gamma, x.r, v, x.terminal)};
}

QDelta q_learning_target(double gamma, const QTable& q, const Transition& t) {
  check_index(q, t.s, t.a);
  const double v = t.terminal ? 0.0 : max_value(q.row(t.next));
  return {t.s, t.a, bootstrap(gamma, t.r, v, t.terminal)};
}

QDelta exp_sarsa_target(double gamma, const QTable& q, const Transition& t,
                        const Policy& pi_target) {
  check_index(q, t.s, t.a);
  const double v =
      t.terminal ? 0.0 : expected_value(q.row(t.next), pi_target.action_distribution(t.next));
  return {t.s, t.a, bootstrap(gamma, t.r, v, t.terminal)};
}

QDelta n_step_target(double gamma, const QTable& q, const NStepFragment& f) {
  if (f.rewards.empty()) throw MalformedEpisode("n-step fragment has no rewards");
  check_index(q, f.s, f.a);
  const double tail = f.bootstrap ? q(f.last_state, f.last_action) : 0.0;
  return {f.s, f.a, discounted_sum(gamma, f.rewards, tail)};
}

std::vector<QDelta> mc_first_visit_targets(double gamma, const Episode& episode) {
  if (episode.steps.empty()) throw MalformedEpisode("episode has no steps");
  const std::size_t n = episode.steps.size();
  std::vector<double> returns(n);
  double g = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double r = episode.steps[i].r;
    if (!std::isfinite(r)) throw MalformedEpisode("non-finite reward in episode");
    g = r + gamma * g;
    returns[i] = g;
  }
  std::vector<QDelta> out;
  std::set<std::pair<State, Action>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& step = episode.steps[i];
    if (seen.insert({step.s, step.a}).second) out.push_back({step.s, step.a, returns[i]});
  }
  return out;
}

QDelta mc_target(double gamma, const Episode& episode) {
  return mc_first_visit_targets(gamma, episode).front();
}

QTable apply_delta(const QTable& q, const QDelta& d, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  check_index(q, d.s, d.a);
  QTable out = q;
  out(d.s, d.a) = q(d.s, d.a) + alpha * (d.target - q(d.s, d.a));
  return out;
}

QTable cotangent_embed(const QDelta& d, const QTable& q, double alpha) {
  check_index(q, d.s, d.a);
  QTable out(q.num_states(), q.num_actions());
  out(d.s, d.a) = alpha * (d.target - q(d.s, d.a));
  return out;
}

SarsaBellman para_bellman_sarsa(double gamma) {
  return {[](const SarsaSample& x, const Unit&) { return StateAction{x.next, x.next_action}; },
          [gamma](const SarsaSample& x, const Unit&, const double& v) {
            return QDelta{x.s, x.a, bootstrap(gamma, x.r, v, x.terminal)};
          }};
}

TransitionBellman para_bellman_transition(double gamma) {
  return {[](const Transition& t, const Unit&) { return t.next; },
          [gamma](const Transition& t, const Unit&, const double& v) {
            return QDelta{t.s, t.a, bootstrap(gamma, t.r, v, t.terminal)};
          }};
}

NStepBellman para_bellman_n_step(double gamma) {
  return {[](const NStepFragment& f, const Unit&) {
            return StateAction{f.last_state, f.last_action};
          },
          [gamma](const NStepFragment& f, const Unit&, const double& v) {
            if (f.rewards.empty()) throw MalformedEpisode("n-step fragment has no rewards");
            return QDelta{f.s, f.a, discounted_sum(gamma, f.rewards, f.bootstrap ? v : 0.0)};
          }};
}

void write_csv(std::ostream& out, const QTable& q) {
  out << "s,a,q\n";
  for (State s = 0; s < q.num_states(); ++s) {
    for (Action a = 0; a < q.num_actions(); ++a) {
      out << s << ',' << a << ',' << format_number(q(s, a)) << '\n';
    }
  }
}

void write_csv(std::ostream& out, const ValueFn& v) {
  out << "s,v\n";
  for (State s = 0; s < v.num_states(); ++s) out << s << ',' << format_number(v[s]) << '\n';
}

}  // namespace catrl
