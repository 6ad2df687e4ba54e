#include "catrl/approx/updates.hpp"

#include <string>

#include "catrl/bellman.hpp"
#include "catrl/errors.hpp"

namespace catrl::approx {

TargetRule target_rule_from_name(std::string_view name) {
  if (name == "sarsa") return TargetRule::kSarsa;
  if (name == "q_learning") return TargetRule::kQLearning;
  if (name == "expected_sarsa") return TargetRule::kExpectedSarsa;
  throw ConfigError("rule must be sarsa, q_learning or expected_sarsa, got '" +
                    std::string(name) + "'");
}

namespace {

double successor_value(std::span<const double> row, Action next_action, TargetRule rule,
                       double epsilon) {
  switch (rule) {
    case TargetRule::kSarsa:
      if (next_action < 0 || static_cast<std::size_t>(next_action) >= row.size()) {
        throw DomainError("sarsa target needs a valid next action");
      }
      return row[static_cast<std::size_t>(next_action)];
    case TargetRule::kQLearning:
      return max_value(row);
    case TargetRule::kExpectedSarsa:
      return expected_value(row, epsilon_greedy_distribution(row, epsilon));
  }
  return 0.0;
}

}  // namespace

double semi_gradient_target(const QNetwork& net, const ParamVector& theta,
                            const SarsaSample& x, double gamma, TargetRule rule,
                            double epsilon) {
  if (x.terminal) return bootstrap(gamma, x.r, 0.0, true);
  const std::vector<double> next = net.eval(theta, x.next);
  return bootstrap(gamma, x.r, successor_value(next, x.next_action, rule, epsilon), false);
}

std::vector<double> semi_gradient_delta(const QNetwork& net, const ParamVector& theta,
                                        const SarsaSample& x, double alpha, double gamma,
                                        TargetRule rule, double epsilon) {
  const double g = semi_gradient_target(net, theta, x, gamma, rule, epsilon);
  const double q = net.eval(theta, x.s).at(static_cast<std::size_t>(x.a));
  const double step = alpha * (g - q);
  std::vector<double> delta = net.output_gradient(theta, x.s, x.a);
  for (double& d : delta) d = step * d;
  return delta;
}

ParamVector semi_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const SarsaSample& x, double alpha, double gamma,
                                   TargetRule rule, double epsilon) {
  return theta.plus(semi_gradient_delta(net, theta, x, alpha, gamma, rule, epsilon));
}

ParamVector semi_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const Transition& t, double alpha, double gamma,
                                   TargetRule rule, double epsilon) {
  if (rule == TargetRule::kSarsa) throw DomainError("the sarsa rule needs (s, a, r, s', a')");
  return semi_gradient_q_update(net, theta, SarsaSample{t.s, t.a, t.r, t.next, -1, t.terminal},
                                alpha, gamma, rule, epsilon);
}

ParamVector full_gradient_q_update(const QNetwork& net, const ParamVector& theta,
                                   const SarsaSample& x, double alpha, double gamma,
                                   TargetRule rule, double epsilon) {
  Tape tape;
  const std::vector<Var> leaves = tape.leaves(theta.values());
  const Var q = net.eval(tape, leaves, x.s).at(static_cast<std::size_t>(x.a));
  Var target = tape.leaf(x.r);
  if (!x.terminal) {
    const std::vector<Var> next = net.eval(tape, leaves, x.next);
    std::vector<double> row;
    for (Var v : next) row.push_back(v.value());
    Var v;
    switch (rule) {
      case TargetRule::kSarsa:
        v = next.at(static_cast<std::size_t>(x.next_action));
        break;
      case TargetRule::kQLearning:
        v = next[static_cast<std::size_t>(greedy_action(row))];
        break;
      case TargetRule::kExpectedSarsa: {
        std::vector<Var> terms;
        for (const auto& atom : epsilon_greedy_distribution(row, epsilon)) {
          terms.push_back(atom.weight * next[static_cast<std::size_t>(atom.value)]);
        }
        v = sum(terms);
        break;
      }
    }
    target = gamma * v + x.r;
  }
  const Var loss = square(q - target);
  const std::vector<double> g = tape.gradient(loss, leaves);
  std::vector<double> delta(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) delta[i] = -(alpha / 2.0) * g[i];
  return theta.plus(delta);
}

FiniteDist<Action> softmax_policy(const QNetwork& net, const ParamVector& theta, State s,
                                  double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
  return softmax_distribution(net.eval(theta, s), temperature);
}

void ActorCritic::check() const {
  if (critic.num_actions() != 1) throw DomainError("the critic must have a single output");
  if (critic.num_states() != actor.num_states()) {
    throw DomainError("actor and critic see different state spaces");
  }
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
}

FiniteDist<Action> ActorCritic::policy(const ParamVector& theta, State s) const {
  return softmax_policy(actor, theta, s, temperature);
}

double ActorCritic::value(const ParamVector& omega, State s) const {
  return critic.eval(omega, s).front();
}

std::vector<double> score(const ActorCritic& ac, const ParamVector& theta, State s, Action a) {
  ac.check();
  ac.actor.check(theta);
  Tape tape;
  const std::vector<Var> leaves = tape.leaves(theta.values());
  std::vector<Var> logits = ac.actor.eval(tape, leaves, s);
  for (Var& l : logits) l = (1.0 / ac.temperature) * l;
  const std::vector<Var> log_p = log_softmax(logits);
  return tape.gradient(log_p.at(static_cast<std::size_t>(a)), leaves);
}

std::pair<std::vector<double>, std::vector<double>> actor_critic_delta(
    const ActorCritic& ac, const ParamVector& theta, const ParamVector& omega,
    const Transition& t, double alpha_actor, double alpha_critic, double gamma) {
  ac.check();
  const double v_s = ac.value(omega, t.s);
  const double v_next = t.terminal ? 0.0 : ac.value(omega, t.next);
  const double advantage = alpha_actor * (t.r - v_s);
  const double td_error = alpha_critic * (bootstrap(gamma, t.r, v_next, t.terminal) - v_s);
  std::vector<double> d_theta = score(ac, theta, t.s, t.a);
  for (double& d : d_theta) d = advantage * d;
  std::vector<double> d_omega = ac.critic.output_gradient(omega, t.s, 0);
  for (double& d : d_omega) d = td_error * d;
  return {std::move(d_theta), std::move(d_omega)};
}

std::pair<ParamVector, ParamVector> actor_critic_update(const ActorCritic& ac,
                                                        const ParamVector& theta,
                                                        const ParamVector& omega,
                                                        const Transition& t, double alpha_actor,
                                                        double alpha_critic, double gamma) {
  auto [d_theta, d_omega] =
      actor_critic_delta(ac, theta, omega, t, alpha_actor, alpha_critic, gamma);
  return {theta.plus(d_theta), omega.plus(d_omega)};
}

}  // namespace catrl::approx
