// Acceptance suite: one PASS/FAIL line per criterion, with its runtime
// against the limit. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "catrl/algorithms/control.hpp"
#include "catrl/algorithms/dp.hpp"
#include "catrl/algorithms/oracles.hpp"
#include "catrl/approx/train.hpp"
#include "catrl/bellman.hpp"
#include "catrl/environments.hpp"
#include "catrl/iteration.hpp"
#include "exact.hpp"
#include "gen.hpp"

using namespace catrl;
using namespace catrl::algorithms;

namespace {

// Collects the first few failure notes of a criterion.
struct Verdict {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (notes.size() < 5) notes.push_back(what);
  }
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<void(Verdict&)> body;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double bellman_by_hand(const Mdp& m, const Policy& pi, const ValueFn& v, State s) {
  if (m.is_terminal(s)) return 0.0;
  double total = 0.0;
  for (const auto& a : pi.action_distribution(s)) {
    for (const auto& o : m.transition(s, a.value)) {
      total += a.weight * o.weight * (o.value.reward + m.gamma() * v[o.value.next]);
    }
  }
  return total;
}

void contraction(Verdict& v) {
  testgen::Gen g(1001);
  double worst = -INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    for (const double gamma : {0.5, 0.9, 0.99}) {
      const Mdp m = testgen::random_mdp(g, gamma);
      const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
      for (int pair = 0; pair < 10; ++pair) {
        const ValueFn v1 = testgen::random_values(g, m.num_states());
        const ValueFn v2 = testgen::random_values(g, m.num_states());
        const double lhs = sup_distance(value_improve(m, pi, v1), value_improve(m, pi, v2));
        const double rhs = gamma * sup_distance(v1, v2);
        worst = std::max(worst, lhs - rhs);
        v.require(lhs <= rhs + 1e-9, "trial " + std::to_string(trial) + ": " + num(lhs) +
                                         " > " + num(rhs));
      }
    }
  }
  v.notes.insert(v.notes.begin(), "max(lhs - gamma*rhs) = " + num(worst));
}

void factorization(Verdict& v) {
  testgen::Gen g(1002);
  double worst_sweep = 0.0;
  double worst_double = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double gamma = std::array{0.5, 0.9, 0.99}[static_cast<std::size_t>(trial % 3)];
    const Mdp m = testgen::random_mdp(g, gamma);
    const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
    const ValueFn val = testgen::random_values(g, m.num_states());
    const ValueFn improved = value_improve(m, pi, val);
    const auto k = optic::apply_continuation(bellman_optic(m, pi),
                                             [&val](const State& s) { return val[s]; });
    for (State s = 0; s < m.num_states(); ++s) {
      const double direct = bellman_by_hand(m, pi, val, s);
      worst_sweep = std::max(worst_sweep, std::abs(improved[s] - direct));
      if (!m.is_terminal(s)) worst_sweep = std::max(worst_sweep, std::abs(k(s) - direct));
    }

    const Mdp open = testgen::random_mdp(g, gamma, {.terminals = false});
    const Policy pi2 = testgen::random_stochastic_policy(g, open.num_states(), open.num_actions());
    const ValueFn w = testgen::random_values(g, open.num_states());
    const ValueFn twice = value_improve(open, pi2, value_improve(open, pi2, w));
    const auto ell = bellman_optic(open, pi2);
    const auto composed =
        optic::apply_continuation(optic::compose(ell, ell), [&w](const State& s) { return w[s]; });
    for (State s = 0; s < open.num_states(); ++s) {
      worst_double = std::max(worst_double, std::abs(twice[s] - composed(s)));
    }
  }
  v.require(worst_sweep <= 1e-12, "sweep difference " + num(worst_sweep));
  v.require(worst_double <= 1e-9, "double-application difference " + num(worst_double));
  v.notes.insert(v.notes.begin(),
                 "sweep diff " + num(worst_sweep) + ", composed diff " + num(worst_double));
}

constexpr int kMod = 101;
int wrap(long x) { return static_cast<int>(((x % kMod) + kMod) % kMod); }

void functoriality(Verdict& v) {
  testgen::Gen g(1003);
  double worst_real = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    // Integer carriers: affine lenses over ℤ/101 and a noisy counter.
    const int a = g.integer(1, 9), b = g.integer(0, 9), c = g.integer(1, 9), d = g.integer(0, 9);
    const int e = g.integer(1, 9), f0 = g.integer(0, 9), h = g.integer(1, 9), i = g.integer(0, 9);
    const optic::Lens<int, int, int, int> f{
        [a, b](const int& x) { return wrap(long{a} * x + b); },
        [c, d](const int& x, const int& yp) { return wrap(long{c} * yp + long{d} * x); }};
    const optic::Lens<int, int, int, int> gl{
        [e, f0](const int& x) { return wrap(long{e} * x + f0); },
        [h, i](const int& x, const int& yp) { return wrap(long{h} * yp + long{i} * x); }};
    const int spread = g.integer(1, 5);
    const iteration::IterationData<int, int, int> it{
        dirac(std::pair<int, int>{g.integer(0, kMod - 1), g.integer(0, kMod - 1)}),
        [spread](const int& m, const int& xp, RngState rng) {
          const auto [u, next] = rng.next_uniform();
          const int jump = static_cast<int>(u * spread);
          return iteration::Emit<int, int>{wrap(long{m} + xp + jump), wrap(2L * m + xp), next};
        }};
    const int kc = g.integer(1, 7);
    const auto k = [kc](const int& y) { return wrap(long{kc} * y + 1); };
    const RngState rng(static_cast<std::uint64_t>(trial));
    const auto lhs = iteration::run_stream(k, iteration::iter_map(optic::compose(f, gl), it), 100, rng);
    const auto rhs =
        iteration::run_stream(k, iteration::iter_map(gl, iteration::iter_map(f, it)), 100, rng);
    v.require(lhs == rhs, "integer streams differ at trial " + std::to_string(trial));

    // Real carriers: contracting affine lenses and a noisy real iterator.
    const double ra = g.real(-0.9, 0.9), rb = g.real(-1, 1), rc = g.real(-0.9, 0.9),
                 rd = g.real(-0.9, 0.9);
    const double sa = g.real(-0.9, 0.9), sb = g.real(-1, 1), sc = g.real(-0.9, 0.9),
                 sd = g.real(-0.9, 0.9);
    const optic::Lens<double, double, double, double> fr{
        [ra, rb](const double& x) { return ra * x + rb; },
        [rc, rd](const double& x, const double& yp) { return rc * yp + rd * x; }};
    const optic::Lens<double, double, double, double> gr{
        [sa, sb](const double& x) { return sa * x + sb; },
        [sc, sd](const double& x, const double& yp) { return sc * yp + sd * x; }};
    const iteration::IterationData<double, double, double> itr{
        dirac(std::pair<double, double>{g.real(-1, 1), g.real(-1, 1)}),
        [](const double& m, const double& xp, RngState r) {
          const auto [u, next] = r.next_uniform();
          return iteration::Emit<double, double>{0.5 * m + 0.3 * xp + u, m - 0.2 * xp, next};
        }};
    const auto kr = [](const double& y) { return 0.7 * y - 0.1; };
    const auto lr =
        iteration::run_stream(kr, iteration::iter_map(optic::compose(fr, gr), itr), 100, rng);
    const auto rr =
        iteration::run_stream(kr, iteration::iter_map(gr, iteration::iter_map(fr, itr)), 100, rng);
    for (std::size_t t = 0; t < lr.size(); ++t) {
      worst_real = std::max(worst_real, std::abs(lr[t] - rr[t]));
    }
    v.require(lr.size() == 100 && rr.size() == 100, "short real stream");
  }
  v.require(worst_real <= 1e-12, "real streams differ by " + num(worst_real));
  v.notes.insert(v.notes.begin(), "max real difference " + num(worst_real));
}

using Tables = std::vector<std::vector<double>>;

Tables ours(const std::function<TrainReport(const StepObserver&)>& run) {
  Tables out;
  run([&out](const StepTrace& t) { out.emplace_back(t.q.data().begin(), t.q.data().end()); });
  return out;
}

Tables theirs(const std::function<oracles::OracleRun(const oracles::TableObserver&)>& run) {
  Tables out;
  run([&out](std::size_t, std::span<const double> q) { out.emplace_back(q.begin(), q.end()); });
  return out;
}

void compositional_equals_direct(Verdict& v) {
  const std::vector<std::pair<std::string, Mdp>> envs{{"two_state_chain", two_state_chain(0.9)},
                                                      {"corner_gridworld", corner_gridworld(0.9)}};
  std::size_t compared = 0;
  for (const auto& [name, m] : envs) {
    const Mrp mrp = induced_mrp(m, uniform_policy(m.num_states(), m.num_actions()));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ControlParams p;
      p.alpha = 0.2;
      p.epsilon = 0.1;
      p.gamma = 0.9;
      p.seed = seed;
      p.budget = Budget::of_steps(10000);
      const auto check = [&](const std::string& algo, const Tables& a, const Tables& b) {
        v.require(a.size() == 10000 && a == b,
                  algo + " on " + name + " seed " + std::to_string(seed) + " differs");
        compared += a.size();
      };
      check("sarsa", ours([&](auto o) { return sarsa(m, p, o); }),
            theirs([&](auto o) { return oracles::oracle_sarsa(m, p, o); }));
      check("q_learning", ours([&](auto o) { return q_learning(m, p, o); }),
            theirs([&](auto o) { return oracles::oracle_q_learning(m, p, o); }));
      check("expected_sarsa", ours([&](auto o) { return expected_sarsa(m, p, o); }),
            theirs([&](auto o) { return oracles::oracle_expected_sarsa(m, p, o); }));
      check("mc_control", ours([&](auto o) { return mc_control(m, p, o); }),
            theirs([&](auto o) { return oracles::oracle_mc(m, p, o); }));
      check("td0", ours([&](auto o) { return td0_run(mrp, p, o); }),
            theirs([&](auto o) { return oracles::oracle_td0(mrp, p, o); }));
    }
  }
  v.notes.insert(v.notes.begin(), std::to_string(compared) + " per-step tables compared");
}

void dp_trio(Verdict& v) {
  testgen::Gen g(1005);
  double worst = 0.0;
  int tie_breaks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Mdp m = testgen::random_mdp(g, trial % 2 ? 0.9 : 0.5,
                                      {.max_states = 4, .max_actions = 2, .min_actions = 2});
    const auto best = exact::brute_force_optimum(m);
    const DpResult results[] = {policy_iteration(m, 1e-11), value_iteration(m, 1e-11),
                                gpi(m, 2, 3, 1e-11)};
    const QTable q_star = action_values(m, ValueFn(best));
    const auto& reference = results[0].policy.as_deterministic()->actions;
    for (const DpResult& r : results) {
      const auto& pi = r.policy.as_deterministic()->actions;
      const auto achieved = exact::solve_policy(m, pi);
      for (State s = 0; s < m.num_states(); ++s) {
        const auto i = static_cast<std::size_t>(s);
        worst = std::max({worst, std::abs(r.v[s] - best[i]), std::abs(achieved[i] - best[i])});
        if (pi[i] != reference[i]) {
          // Different greedy choices are only allowed between tied actions.
          ++tie_breaks;
          v.require(std::abs(q_star(s, pi[i]) - q_star(s, reference[i])) < 1e-8,
                    "trial " + std::to_string(trial) + ": greedy policies differ at s=" +
                        std::to_string(s));
        }
      }
    }
  }
  v.require(worst <= 1e-8, "value difference " + num(worst));
  v.notes.insert(v.notes.begin(), "max value difference " + num(worst) + ", tied choices " +
                                      std::to_string(tie_breaks));
}

void para_k_bridge(Verdict& v) {
  testgen::Gen g(1006);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int S = g.integer(1, 6), A = g.integer(1, 3);
    const QTable q = testgen::random_table(g, S, A);
    const double gamma = g.real(0, 1);
    const SarsaSample x{g.integer(0, S - 1), g.integer(0, A - 1), g.real(-3, 3),
                        g.integer(0, S - 1), g.integer(0, A - 1), g.coin(0.2)};
    if (!(para::para_K(para_bellman_sarsa(gamma))(x, Unit{}, q_lookup(q)) ==
          sarsa_target(gamma, q, x))) {
      ++mismatches;
    }
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
}

void control_quality(Verdict& v) {
  const Mdp cliff = cliff_walking(0.99);
  const DpResult optimal = value_iteration(cliff, 1e-10);
  const QTable q_star = action_values(cliff, optimal.v);
  ControlParams p;
  p.alpha = 0.5;
  p.epsilon = 0.1;
  p.gamma = 0.99;
  p.seed = 7;
  p.budget = Budget::of_episodes(500);

  const TrainReport ql = q_learning(cliff, p);
  v.require(q_learning(cliff, p).q == ql.q, "q_learning is not rerun-stable");
  const Episode path = greedy_rollout(cliff, q_star, 200);
  v.require(path.terminal, "optimal rollout does not reach the goal");
  int checked = 0;
  for (const EpisodeStep& step : path.steps) {
    const Action learned = greedy_action(ql.q.row(step.s));
    ++checked;
    v.require(std::abs(q_star(step.s, learned) - optimal.v[step.s]) < 1e-8,
              "q_learning greedy action at s=" + std::to_string(step.s) + " is not optimal");
  }

  const TrainReport sa = sarsa(cliff, p);
  v.require(sarsa(cliff, p).q == sa.q, "sarsa is not rerun-stable");
  const Episode safe = greedy_rollout(cliff, sa.q, 200);
  double ret = 0.0;
  bool fell = false;
  for (const EpisodeStep& step : safe.steps) {
    ret += step.r;
    fell = fell || step.r <= -100.0;
  }
  // Up, along the top row, and down: 17 steps at −1 each.
  const double baseline = -17.0;
  v.require(safe.terminal && !fell, "sarsa greedy path is not safe");
  v.require(ret >= baseline, "sarsa greedy return " + num(ret) + " < " + num(baseline));
  v.notes.insert(v.notes.begin(), std::to_string(checked) + " optimal-path states checked; sarsa return " +
                                      num(ret) + " (optimal path " +
                                      std::to_string(path.steps.size()) + " steps)");
}

void prediction_coherence(Verdict& v) {
  const Mrp walk = chain_mrp(5);
  const ValueFn exact =
      policy_evaluation(walk, uniform_policy(walk.num_states(), 1), 1e-12);
  const ValueFn td = td0_prediction(walk, 100000, 1.0, walk.gamma(), 8, StepSize::kInverseVisits);
  const double d = sup_distance(td, exact);
  v.require(d <= 0.05, "sup distance " + num(d));
  v.notes.insert(v.notes.begin(), "sup distance " + num(d));
}

void semi_gradient(Verdict& v) {
  using namespace catrl::approx;
  testgen::Gen g(1009);
  int mismatches = 0;
  const TargetRule rules[] = {TargetRule::kSarsa, TargetRule::kQLearning,
                              TargetRule::kExpectedSarsa};
  for (int trial = 0; trial < 1000; ++trial) {
    const int S = g.integer(1, 6), A = g.integer(1, 4);
    const QNetwork net = QNetwork::linear(S, A);
    const QTable q = testgen::random_table(g, S, A);
    std::vector<double> theta(static_cast<std::size_t>(S * A));
    for (State s = 0; s < S; ++s) {
      for (Action a = 0; a < A; ++a) theta[static_cast<std::size_t>(a * S + s)] = q(s, a);
    }
    const ParamVector th(net.layout(), theta);
    const SarsaSample x{g.integer(0, S - 1), g.integer(0, A - 1), g.real(-3, 3),
                        g.integer(0, S - 1), g.integer(0, A - 1), g.coin(0.2)};
    const double alpha = g.real(0, 1), gamma = g.real(0, 1), eps = g.real(0, 1);
    const TargetRule rule = rules[trial % 3];
    const Transition t{x.s, x.a, x.r, x.next, x.terminal};
    QDelta delta{};
    switch (rule) {
      case TargetRule::kSarsa: delta = sarsa_target(gamma, q, x); break;
      case TargetRule::kQLearning: delta = q_learning_target(gamma, q, t); break;
      case TargetRule::kExpectedSarsa:
        delta = exp_sarsa_target(gamma, q, t, Policy(Policy::EpsilonGreedy{q, eps}));
        break;
    }
    const ParamVector next = semi_gradient_q_update(net, th, x, alpha, gamma, rule, eps);
    if (!(net.table(next) == apply_delta(q, delta, alpha))) ++mismatches;
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " one-hot mismatches");

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const QNetwork net = QNetwork::mlp(g.integer(1, 5), g.integer(1, 6), g.integer(1, 4));
    std::vector<double> theta(net.zeros().size());
    for (double& x : theta) x = g.real(-1, 1);
    const State s = g.integer(0, net.num_states() - 1);
    const Action a = g.integer(0, net.num_actions() - 1);
    const double target = g.real(-2, 2);
    const auto loss = [&](Tape& tape, std::span<const Var> th) {
      return square(net.eval(tape, th, s)[static_cast<std::size_t>(a)] + (-target));
    };
    const auto analytic = grad(loss, theta);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const auto at = [&](double shift) {
        std::vector<double> moved = theta;
        moved[i] += shift;
        Tape tape;
        const auto leaves = tape.leaves(moved);
        return loss(tape, leaves).value();
      };
      const double numeric = (at(1e-5) - at(-1e-5)) / 2e-5;
      const double scale = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
  }
  v.require(worst <= 1e-4, "finite-difference relative error " + num(worst));
  v.notes.insert(v.notes.begin(), "max finite-difference relative error " + num(worst));
}

void bandit(Verdict& v) {
  const auto env = multi_armed_bandit({dirac(0.0), dirac(1.0)});
  ControlParams p;
  p.alpha = 0.1;
  p.epsilon = 0.1;
  p.seed = 10;
  p.budget = Budget::of_steps(10000);
  const double mean = bandit_epsilon_greedy(env, 2, p).mean_return();
  v.require(std::abs(mean - 0.95) <= 0.05, "mean reward " + num(mean));
  v.notes.insert(v.notes.begin(), "mean reward " + num(mean));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Bellman operator is a sup-norm contraction", 5, contraction},
      {2, "Bellman operator factors through the optic", 5, factorization},
      {3, "iteration functor preserves composition", 5, functoriality},
      {4, "compositional learners trace-equal direct loops", 30, compositional_equals_direct},
      {5, "PIT, VIT, GPI(2,3) agree with brute force", 20, dp_trio},
      {6, "para_K of the SARSA lens is the SARSA target", 1, para_k_bridge},
      {7, "cliff walking control quality", 30, control_quality},
      {8, "TD(0) with 1/n steps matches policy evaluation", 10, prediction_coherence},
      {9, "semi-gradient reduction and MLP gradients", 10, semi_gradient},
      {10, "epsilon-greedy bandit mean reward", 2, bandit},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.ok = false;
      v.notes.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.limit_s) {
      v.ok = false;
      v.notes.push_back("over the " + num(c.limit_s) + " s limit");
    }
    if (!v.ok) ++failed;
    std::printf("%s %2d %s (%.2f s / %.0f s)", v.ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                elapsed, c.limit_s);
    for (const auto& note : v.notes) std::printf(" | %s", note.c_str());
    std::printf("\n");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
