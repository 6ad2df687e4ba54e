#include "catrl/algorithms/oracles.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace catrl::oracles {
namespace {

// The environment half of the draw-order contract.
class DirectEnv {
 public:
  struct Result {
    double r;
    State next;
    bool terminal;
    bool end;
  };

  DirectEnv(const Mdp& mdp, int cap, RngState rng) : mdp_(mdp), cap_(cap), rng_(rng) {
    reset();
  }

  State state() const { return s_; }

  Result act(Action a) {
    const auto [o, after] = sample(mdp_.transition(s_, a), rng_);
    rng_ = after;
    ++t_;
    const bool terminal = mdp_.is_terminal(o.next);
    const bool end = terminal || (cap_ > 0 && t_ >= cap_);
    s_ = o.next;
    return {o.reward, o.next, terminal, end};
  }

  void reset() {
    const auto [s, after] = sample(mdp_.start(), rng_);
    rng_ = after;
    s_ = s;
    t_ = 0;
  }

 private:
  const Mdp& mdp_;
  int cap_;
  RngState rng_;
  State s_ = 0;
  int t_ = 0;
};

int argmax(const std::vector<double>& q, int row, int num_actions) {
  const std::size_t base = static_cast<std::size_t>(row * num_actions);
  int best = 0;
  for (int a = 1; a < num_actions; ++a) {
    if (q[base + static_cast<std::size_t>(a)] > q[base + static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

// π_ε(a | s): greedy weight (1 − ε) + ε/|A|, others ε/|A|.
double eps_weight(int a, int greedy, double eps, int num_actions) {
  const double explore = eps / static_cast<double>(num_actions);
  return a == greedy ? (1.0 - eps) + explore : explore;
}

// Inverse CDF over the positive-weight actions in ascending order.
int draw_eps_greedy(const std::vector<double>& q, int s, int num_actions, double eps,
                    RngState& rng) {
  const int greedy = argmax(q, s, num_actions);
  const auto [u, after] = rng.next_uniform();
  rng = after;
  double cumulative = 0.0;
  int last = greedy;
  for (int a = 0; a < num_actions; ++a) {
    const double w = eps_weight(a, greedy, eps, num_actions);
    if (w == 0.0) continue;
    cumulative += w;
    last = a;
    if (u < cumulative) return a;
  }
  return last;
}

struct Table {
  int num_actions;
  std::vector<double> q;
  std::vector<int> visits;
  double alpha;
  bool inverse_visits;

  Table(const Mdp& mdp, const ControlParams& p)
      : num_actions(mdp.num_actions()),
        q(static_cast<std::size_t>(mdp.num_states() * mdp.num_actions()), p.initial_q),
        visits(q.size(), 0),
        alpha(p.alpha),
        inverse_visits(p.step_size == algorithms::StepSize::kInverseVisits) {
    for (State s = 0; s < mdp.num_states(); ++s) {
      if (!mdp.is_terminal(s)) continue;
      for (int a = 0; a < num_actions; ++a) at(s, a) = 0.0;
    }
  }

  double& at(int s, int a) { return q[static_cast<std::size_t>(s * num_actions + a)]; }

  // Q(s,a) ← Q(s,a) + α(G − Q(s,a)).
  void update(int s, int a, double g) {
    const std::size_t i = static_cast<std::size_t>(s * num_actions + a);
    const double step = inverse_visits ? 1.0 / static_cast<double>(++visits[i]) : alpha;
    q[i] = q[i] + step * (g - q[i]);
  }
};

struct Progress {
  const ControlParams& p;
  std::vector<double> returns;
  double running = 0.0;
  std::size_t steps = 0;

  // Returns true when the budget is used up.
  bool record(double r, bool end) {
    ++steps;
    running += r;
    if (end) {
      returns.push_back(running);
      running = 0.0;
    }
    return p.budget.reached(returns.size(), steps);
  }
};

double target(double gamma, double r, double v, bool terminal) {
  return terminal ? r : r + gamma * v;
}

// One-step methods that act once per step at s.
template <class SuccessorValue>
OracleRun one_step_loop(const Mdp& mdp, const ControlParams& p, bool choose,
                        SuccessorValue successor, const TableObserver& observe) {
  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  DirectEnv env(mdp, p.max_episode_length, rngs.env);
  RngState agent = rngs.agent;
  Table table(mdp, p);
  Progress progress{p, {}};
  for (std::size_t t = 0;; ++t) {
    const State s = env.state();
    const int a = choose ? draw_eps_greedy(table.q, s, table.num_actions, p.epsilon, agent) : 0;
    const auto out = env.act(a);
    const double v = out.terminal ? 0.0 : successor(table, out.next);
    table.update(s, a, target(p.gamma, out.r, v, out.terminal));
    if (observe) observe(t, table.q);
    const bool done = progress.record(out.r, out.end);
    if (out.end) env.reset();
    if (done) break;
  }
  return {table.q, progress.returns, progress.steps};
}

double max_successor(Table& table, State next) {
  double best = table.at(next, 0);
  for (int a = 1; a < table.num_actions; ++a) best = std::max(best, table.at(next, a));
  return best;
}

// Horner form r₀ + γ(r₁ + γ(… + γ·tail)).
double discounted(double gamma, const std::vector<double>& rewards, std::size_t from,
                  double tail) {
  double g = tail;
  for (std::size_t i = rewards.size(); i-- > from;) g = rewards[i] + gamma * g;
  return g;
}

}  // namespace

OracleRun oracle_q_learning(const Mdp& mdp, const ControlParams& p,
                            const TableObserver& observe) {
  return one_step_loop(mdp, p, true, max_successor, observe);
}

OracleRun oracle_expected_sarsa(const Mdp& mdp, const ControlParams& p,
                                const TableObserver& observe) {
  const auto expected = [&p](Table& table, State next) {
    const int greedy = argmax(table.q, next, table.num_actions);
    double total = 0.0;
    for (int a = 0; a < table.num_actions; ++a) {
      const double w = eps_weight(a, greedy, p.epsilon, table.num_actions);
      if (w == 0.0) continue;
      total += w * table.at(next, a);
    }
    return total;
  };
  return one_step_loop(mdp, p, true, expected, observe);
}

OracleRun oracle_td0(const Mrp& mrp, const ControlParams& p, const TableObserver& observe) {
  return one_step_loop(mrp, p, false, max_successor, observe);
}

OracleRun oracle_sarsa(const Mdp& mdp, const ControlParams& p, const TableObserver& observe) {
  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  DirectEnv env(mdp, p.max_episode_length, rngs.env);
  RngState agent = rngs.agent;
  Table table(mdp, p);
  Progress progress{p, {}};
  int a = draw_eps_greedy(table.q, env.state(), table.num_actions, p.epsilon, agent);
  for (std::size_t t = 0;; ++t) {
    const State s = env.state();
    const auto out = env.act(a);
    const int a_next = draw_eps_greedy(table.q, out.next, table.num_actions, p.epsilon, agent);
    const double v = out.terminal ? 0.0 : table.at(out.next, a_next);
    table.update(s, a, target(p.gamma, out.r, v, out.terminal));
    if (observe) observe(t, table.q);
    const bool done = progress.record(out.r, out.end);
    if (done) break;
    if (out.end) {
      env.reset();
      a = draw_eps_greedy(table.q, env.state(), table.num_actions, p.epsilon, agent);
    } else {
      a = a_next;
    }
  }
  return {table.q, progress.returns, progress.steps};
}

OracleRun oracle_n_step_sarsa(const Mdp& mdp, int n, const ControlParams& p,
                              const TableObserver& observe) {
  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  DirectEnv env(mdp, p.max_episode_length, rngs.env);
  RngState agent = rngs.agent;
  Table table(mdp, p);
  Progress progress{p, {}};
  // Per episode: S_t, A_t and R_{t+1}, indexed from the episode start.
  std::vector<State> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  int a = draw_eps_greedy(table.q, env.state(), table.num_actions, p.epsilon, agent);
  std::size_t tau = 0;  // next time index awaiting its update
  for (std::size_t t = 0;; ++t) {
    const State s = env.state();
    states.push_back(s);
    actions.push_back(a);
    const auto out = env.act(a);
    rewards.push_back(out.r);
    const int a_next = draw_eps_greedy(table.q, out.next, table.num_actions, p.epsilon, agent);
    const std::size_t horizon = rewards.size();  // T so far
    if (out.end) {
      for (; tau < horizon; ++tau) {
        const double tail = out.terminal ? 0.0 : table.at(out.next, a_next);
        const std::vector<double> tail_rewards(rewards.begin() + static_cast<long>(tau),
                                               rewards.end());
        table.update(states[tau], actions[tau], discounted(p.gamma, tail_rewards, 0, tail));
      }
    } else if (horizon >= static_cast<std::size_t>(n)) {
      const double tail = table.at(out.next, a_next);
      table.update(states[tau], actions[tau], discounted(p.gamma, rewards, tau, tail));
      ++tau;
    }
    if (observe) observe(t, table.q);
    const bool done = progress.record(out.r, out.end);
    if (done) break;
    if (out.end) {
      env.reset();
      states.clear();
      actions.clear();
      rewards.clear();
      tau = 0;
      a = draw_eps_greedy(table.q, env.state(), table.num_actions, p.epsilon, agent);
    } else {
      a = a_next;
    }
  }
  return {table.q, progress.returns, progress.steps};
}

namespace {

OracleRun monte_carlo_loop(const Mdp& mdp, const ControlParams& p, bool choose,
                           const TableObserver& observe) {
  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  DirectEnv env(mdp, p.max_episode_length, rngs.env);
  RngState agent = rngs.agent;
  Table table(mdp, p);
  Progress progress{p, {}};
  std::vector<std::pair<State, int>> visited;
  std::vector<double> rewards;
  for (std::size_t t = 0;; ++t) {
    const State s = env.state();
    const int a = choose ? draw_eps_greedy(table.q, s, table.num_actions, p.epsilon, agent) : 0;
    const auto out = env.act(a);
    visited.emplace_back(s, a);
    rewards.push_back(out.r);
    if (out.end) {
      std::vector<double> returns(rewards.size());
      double g = 0.0;
      for (std::size_t i = rewards.size(); i-- > 0;) {
        g = rewards[i] + p.gamma * g;
        returns[i] = g;
      }
      std::set<std::pair<State, int>> seen;
      for (std::size_t i = 0; i < visited.size(); ++i) {
        if (seen.insert(visited[i]).second) {
          table.update(visited[i].first, visited[i].second, returns[i]);
        }
      }
      visited.clear();
      rewards.clear();
    }
    if (observe) observe(t, table.q);
    const bool done = progress.record(out.r, out.end);
    if (out.end) env.reset();
    if (done) break;
  }
  return {table.q, progress.returns, progress.steps};
}

}  // namespace

OracleRun oracle_mc(const Mdp& mdp, const ControlParams& p, const TableObserver& observe) {
  return monte_carlo_loop(mdp, p, true, observe);
}

OracleRun oracle_mc_prediction(const Mrp& mrp, const ControlParams& p,
                               const TableObserver& observe) {
  return monte_carlo_loop(mrp, p, false, observe);
}

OracleRun oracle_bandit(const std::vector<FiniteDist<double>>& arms, const ControlParams& p,
                        const TableObserver& observe) {
  const LoopRngs rngs = LoopRngs::from_seed(p.seed);
  const int num_arms = static_cast<int>(arms.size());
  RngState agent = rngs.agent;
  // The bandit's start state is a point mass but is still drawn once.
  RngState env = rngs.env.next_uniform().second;
  std::vector<double> q(arms.size(), p.initial_q);
  std::vector<int> visits(arms.size(), 0);
  std::vector<double> rewards;
  for (std::size_t t = 0;; ++t) {
    const int a = draw_eps_greedy(q, 0, num_arms, p.epsilon, agent);
    const auto [r, after] = sample(arms[static_cast<std::size_t>(a)], env);
    env = after;
    const auto i = static_cast<std::size_t>(a);
    const double step = p.step_size == algorithms::StepSize::kInverseVisits
                            ? 1.0 / static_cast<double>(++visits[i])
                            : p.alpha;
    q[i] = q[i] + step * (r - q[i]);
    rewards.push_back(r);
    if (observe) observe(t, q);
    if (p.budget.reached(rewards.size(), rewards.size())) break;
  }
  return {q, rewards, rewards.size()};
}

std::vector<std::vector<double>> oracle_value_iteration(const Mdp& mdp, double tol) {
  const auto n = static_cast<std::size_t>(mdp.num_states());
  std::vector<std::vector<double>> iterates;
  std::vector<double> v(n, 0.0);
  for (std::size_t sweep = 0; sweep < 1'000'000; ++sweep) {
    std::vector<double> next(n, 0.0);
    double change = 0.0;
    for (State s = 0; s < mdp.num_states(); ++s) {
      if (mdp.is_terminal(s)) continue;
      double best = -INFINITY;
      for (Action a = 0; a < mdp.num_actions(); ++a) {
        double total = 0.0;
        for (const auto& atom : mdp.transition(s, a)) {
          total += atom.weight * (atom.value.reward + mdp.gamma() * v[static_cast<std::size_t>(
                                                                       atom.value.next)]);
        }
        best = std::max(best, total);
      }
      next[static_cast<std::size_t>(s)] = best;
      change = std::max(change, std::abs(best - v[static_cast<std::size_t>(s)]));
    }
    v = next;
    iterates.push_back(v);
    if (change < tol) break;
  }
  return iterates;
}

}  // namespace catrl::oracles
