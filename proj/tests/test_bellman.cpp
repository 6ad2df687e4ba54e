#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "catrl/algorithms/dp.hpp"
#include "catrl/bellman.hpp"
#include "catrl/environments.hpp"
#include "gen.hpp"

using namespace catrl;

namespace {

constexpr std::array kGammas{0.5, 0.9, 0.99};

// 𝔼_{a~π(s), (s',r)~t(s,a)}[r + γV(s')], written directly from the tables.
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

Mdp scale_rewards(const Mdp& m, double c) {
  std::vector<FiniteDist<Outcome>> t;
  for (State s = 0; s < m.num_states(); ++s) {
    for (Action a = 0; a < m.num_actions(); ++a) {
      t.push_back(pushforward(m.transition(s, a),
                              [c](const Outcome& o) { return Outcome{o.next, c * o.reward}; }));
    }
  }
  std::vector<bool> terminals;
  for (State s = 0; s < m.num_states(); ++s) terminals.push_back(m.is_terminal(s));
  return Mdp(m.num_states(), m.num_actions(), std::move(t), m.gamma(), std::move(terminals),
             m.start());
}

}  // namespace

TEST_CASE("bellman optic passes") {
  const Mdp chain = two_state_chain(0.5);
  const Policy go(Policy::Deterministic{{kGo, kGo}});
  const auto ell = bellman_optic(chain, go);
  CHECK(ell.forward(0) == dirac(std::pair<double, State>{1.0, 1}));
  CHECK(ell.backward(dirac(1.0), 0.0) == 1.0);
  CHECK(ell.backward(FiniteDist<double>({{0.0, 0.5}, {2.0, 0.5}}), 4.0) == 3.0);
  CHECK(bellman_optic(chain.with_gamma(0.0), go).backward(dirac(1.0), 123.0) == 1.0);
}

TEST_CASE("value_improve on the two-state chain") {
  const Mdp chain = two_state_chain(0.5);
  const Policy go(Policy::Deterministic{{kGo, kGo}});
  const ValueFn once = value_improve(chain, go, ValueFn(2));
  CHECK(once == ValueFn(std::vector<double>{1.0, 0.0}));
  CHECK(value_improve(chain, go, once) == once);
  // γ = 0 gives the expected immediate reward whatever V is.
  const Policy mix(Policy::Stochastic{{FiniteDist<Action>({{kStay, 0.75}, {kGo, 0.25}}),
                                       dirac(Action{kStay})}});
  const ValueFn flat = value_improve(chain.with_gamma(0.0), mix, ValueFn(std::vector<double>{7, 9}));
  CHECK(flat[0] == 0.25);
  CHECK(flat[1] == 0.0);
}

TEST_CASE("value_improve matches the expectation written out") {
  testgen::Gen g(61);
  for (int trial = 0; trial < 200; ++trial) {
    const Mdp m = testgen::random_mdp(g, kGammas[static_cast<std::size_t>(trial % 3)]);
    const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
    const ValueFn v = testgen::random_values(g, m.num_states());
    const ValueFn out = value_improve(m, pi, v);
    for (State s = 0; s < m.num_states(); ++s) {
      CHECK(std::abs(out[s] - bellman_by_hand(m, pi, v, s)) < 1e-9);
    }
  }
}

TEST_CASE("value_improve is a sup-norm contraction") {
  testgen::Gen g(62);
  for (int trial = 0; trial < 200; ++trial) {
    for (const double gamma : kGammas) {
      const Mdp m = testgen::random_mdp(g, gamma);
      const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
      for (int pair = 0; pair < 3; ++pair) {
        const ValueFn v1 = testgen::random_values(g, m.num_states());
        const ValueFn v2 = testgen::random_values(g, m.num_states());
        const double lhs = sup_distance(value_improve(m, pi, v1), value_improve(m, pi, v2));
        CHECK(lhs <= gamma * sup_distance(v1, v2) + 1e-9);
      }
    }
  }
}

TEST_CASE("fixpoints satisfy the Bellman equation") {
  testgen::Gen g(63);
  for (int trial = 0; trial < 60; ++trial) {
    const Mdp m = testgen::random_mdp(g, kGammas[static_cast<std::size_t>(trial % 2)]);
    const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
    const ValueFn v = algorithms::evaluate_policy(m, pi, 1e-12).v;
    for (State s = 0; s < m.num_states(); ++s) {
      CHECK(std::abs(v[s] - bellman_by_hand(m, pi, v, s)) < 1e-9);
    }
  }
}

TEST_CASE("two sweeps equal one sweep of the composed optic") {
  testgen::Gen g(64);
  for (int trial = 0; trial < 100; ++trial) {
    const Mdp m = testgen::random_mdp(g, kGammas[static_cast<std::size_t>(trial % 3)],
                                      {.terminals = false});
    const Policy pi = testgen::random_stochastic_policy(g, m.num_states(), m.num_actions());
    const ValueFn v = testgen::random_values(g, m.num_states());
    const ValueFn twice = value_improve(m, pi, value_improve(m, pi, v));
    const auto ell = bellman_optic(m, pi);
    const auto composed =
        optic::apply_continuation(optic::compose(ell, ell), [&v](const State& s) { return v[s]; });
    for (State s = 0; s < m.num_states(); ++s) CHECK(std::abs(twice[s] - composed(s)) < 1e-9);
  }
}

TEST_CASE("policy_improve") {
  const Mdp chain = two_state_chain(0.5);
  const Policy pi = policy_improve(chain, ValueFn(2));
  CHECK(pi.as_deterministic()->actions[0] == kGo);
  // All actions tie in the corner gridworld's terminal states and for V ≡ 0
  // at its interior moves: lowest id wins.
  const Policy flat = policy_improve(corner_gridworld(), ValueFn(16));
  for (const Action a : flat.as_deterministic()->actions) CHECK(a == 0);

  testgen::Gen g(65);
  for (int trial = 0; trial < 200; ++trial) {
    const Mdp m = testgen::random_mdp(g, 0.9, {.integer_rewards = true});
    const ValueFn v = algorithms::value_iteration(m, 1e-12).v;
    const double c = std::array{0.5, 2.0, 4.0}[static_cast<std::size_t>(trial % 3)];
    const Mdp scaled = scale_rewards(m, c);
    // V scales with the rewards, so compare against the scaled value function.
    const Policy a = policy_improve(m, v);
    const Policy b = policy_improve(scaled, c * v);
    CHECK(a.as_deterministic()->actions == b.as_deterministic()->actions);
  }
}

TEST_CASE("action_values") {
  const QTable q = action_values(two_state_chain(0.5), ValueFn(std::vector<double>{2.0, 6.0}));
  CHECK(q(0, kStay) == 1.0);
  CHECK(q(0, kGo) == 4.0);
  CHECK(q(1, kStay) == 3.0);
}

TEST_CASE("sample targets") {
  QTable q(4, 2);
  q(3, 0) = 0.0;
  q(3, 1) = 5.0;
  q(2, 1) = 2.0;
  CHECK(sarsa_target(0.9, q, {0, 1, 1.0, 2, 1}).target == doctest::Approx(2.8));
  CHECK(sarsa_target(0.0, q, {0, 1, 1.0, 2, 1}).target == 1.0);
  CHECK(sarsa_target(0.9, q, {0, 1, 1.0, 2, 1, true}).target == 1.0);
  CHECK(q_learning_target(0.5, q, {0, 1, 1.0, 3}) == QDelta{0, 1, 3.5});
  CHECK(q_learning_target(0.0, q, {0, 1, 1.0, 3}).target == 1.0);

  QTable two(1, 2);
  two(0, 1) = 2.0;
  CHECK(exp_sarsa_target(1.0, two, {0, 0, 0.0, 0}, uniform_policy(1, 2)).target == 1.0);
  // Point-mass target policy is SARSA with that action.
  CHECK(exp_sarsa_target(0.9, q, {0, 1, 1.0, 2}, Policy(Policy::Deterministic{{0, 0, 1, 0}})) ==
        sarsa_target(0.9, q, {0, 1, 1.0, 2, 1}));
  // ε = 0 greedy target policy is Q-learning.
  CHECK(exp_sarsa_target(0.5, q, {0, 1, 1.0, 3}, Policy(Policy::EpsilonGreedy{q, 0.0})) ==
        q_learning_target(0.5, q, {0, 1, 1.0, 3}));

  Episode ep{{{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}}, 3, true};
  CHECK(mc_target(0.5, ep) == QDelta{0, 0, 1.75});

  QTable q4(3, 1);
  q4(2, 0) = 4.0;
  CHECK(n_step_target(0.5, q4, {0, 0, {1.0, 1.0}, 2, 0}).target == 2.5);
  CHECK(n_step_target(0.9, q, {0, 1, {1.0}, 2, 1}) == sarsa_target(0.9, q, {0, 1, 1.0, 2, 1}));
  CHECK(n_step_target(0.5, q4, {0, 0, {1.0, 1.0}, 2, 0, false}).target == 1.5);
  CHECK_THROWS_AS(n_step_target(0.5, q4, {0, 0, {}, 2, 0}), MalformedEpisode);
  CHECK_THROWS_AS(mc_target(0.5, Episode{}), MalformedEpisode);
}

TEST_CASE("first-visit returns") {
  // s0 → s1 → s0 → end, rewards 1, 2, 4, γ = 0.5.
  const Episode ep{{{0, 0, 1.0}, {1, 1, 2.0}, {0, 0, 4.0}}, 2, true};
  const auto targets = mc_first_visit_targets(0.5, ep);
  REQUIRE(targets.size() == 2);
  CHECK(targets[0] == QDelta{0, 0, 1.0 + 0.5 * 2.0 + 0.25 * 4.0});
  CHECK(targets[1] == QDelta{1, 1, 2.0 + 0.5 * 4.0});
  CHECK_THROWS_AS(mc_first_visit_targets(0.5, Episode{{{0, 0, NAN}}, 1, true}), MalformedEpisode);
}

TEST_CASE("apply_delta and its cotangent") {
  QTable q(2, 2);
  q(1, 0) = 2.0;
  CHECK(apply_delta(q, {1, 0, 4.0}, 0.5)(1, 0) == 3.0);
  CHECK(apply_delta(q, {1, 0, 4.0}, 1.0)(1, 0) == 4.0);
  CHECK(apply_delta(q, {1, 0, 4.0}, 0.0) == q);
  CHECK(cotangent_embed({1, 0, 2.0}, q, 0.7) == QTable(2, 2));
  const QTable single = cotangent_embed({0, 1, 6.0}, q, 1.0);
  CHECK(single(0, 1) == 6.0);
  CHECK(single(1, 0) == 0.0);
  CHECK_THROWS_AS(apply_delta(q, {0, 0, 1.0}, 1.5), DomainError);
  CHECK_THROWS_AS(apply_delta(q, {5, 0, 1.0}, 0.5), DomainError);

  testgen::Gen g(66);
  for (int trial = 0; trial < 300; ++trial) {
    const QTable t = testgen::random_table(g, g.integer(1, 5), g.integer(1, 4));
    const QDelta d{g.integer(0, t.num_states() - 1), g.integer(0, t.num_actions() - 1),
                   g.real(-10, 10)};
    const double alpha = g.real(0, 1);
    const QTable updated = apply_delta(t, d, alpha);
    CHECK(max_abs_difference(t + cotangent_embed(d, t, alpha), updated) <= 1e-12);
    for (State s = 0; s < t.num_states(); ++s) {
      for (Action a = 0; a < t.num_actions(); ++a) {
        if (s != d.s || a != d.a) CHECK(updated(s, a) == t(s, a));
      }
    }
    CHECK(std::abs(updated(d.s, d.a) - ((1 - alpha) * t(d.s, d.a) + alpha * d.target)) < 1e-12);
  }
}

TEST_CASE("parametric Bellman lenses agree with the targets") {
  testgen::Gen g(67);
  for (int trial = 0; trial < 1000; ++trial) {
    const int S = g.integer(1, 6), A = g.integer(1, 3);
    const QTable q = testgen::random_table(g, S, A);
    const double gamma = g.real(0, 1);
    const SarsaSample x{g.integer(0, S - 1), g.integer(0, A - 1), g.real(-3, 3),
                        g.integer(0, S - 1), g.integer(0, A - 1), g.coin(0.2)};
    CHECK(para::para_K(para_bellman_sarsa(gamma))(x, Unit{}, q_lookup(q)) ==
          sarsa_target(gamma, q, x));
    const Transition t{x.s, x.a, x.r, x.next, x.terminal};
    CHECK(para::para_K(para_bellman_transition(gamma))(t, Unit{}, greedy_lookup(q)) ==
          q_learning_target(gamma, q, t));
    const Policy pi = testgen::random_stochastic_policy(g, S, A);
    CHECK(para::para_K(para_bellman_transition(gamma))(
              t, Unit{}, expected_lookup(q, [&](State s) { return pi.action_distribution(s); })) ==
          exp_sarsa_target(gamma, q, t, pi));
    const NStepFragment f{x.s, x.a, {x.r, g.real(-3, 3)}, x.next, x.next_action, !x.terminal};
    CHECK(para::para_K(para_bellman_n_step(gamma))(f, Unit{}, q_lookup(q)) ==
          n_step_target(gamma, q, f));
  }
  const SarsaSample x{0, 0, 1.5, 0, 0};
  QTable q(1, 1, 100.0);
  CHECK(para::para_K(para_bellman_sarsa(0.0))(x, Unit{}, q_lookup(q)).target == 1.5);
}

TEST_CASE("csv output") {
  QTable q(2, 2);
  q(0, 1) = 0.5;
  q(1, 0) = -2.0;
  std::ostringstream qs;
  write_csv(qs, q);
  CHECK(qs.str() == "s,a,q\n0,0,0\n0,1,0.5\n1,0,-2\n1,1,0\n");
  std::ostringstream vs;
  write_csv(vs, ValueFn(std::vector<double>{1.25, -3.0}));
  CHECK(vs.str() == "s,v\n0,1.25\n1,-3\n");
}
