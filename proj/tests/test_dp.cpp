#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "catrl/algorithms/dp.hpp"
#include "catrl/algorithms/oracles.hpp"
#include "catrl/environments.hpp"
#include "exact.hpp"
#include "gen.hpp"

using namespace catrl;
using namespace catrl::algorithms;

namespace {

using exact::brute_force_optimum;
using exact::solve_policy;

const std::vector<Action>& actions(const Policy& p) { return p.as_deterministic()->actions; }

// Greedy policies agree wherever the greedy choice is not a tie.
void check_same_greedy_choice(const Mdp& m, const DpResult& a, const DpResult& b) {
  const QTable q = action_values(m, a.v);
  for (State s = 0; s < m.num_states(); ++s) {
    const Action x = actions(a.policy)[static_cast<std::size_t>(s)];
    const Action y = actions(b.policy)[static_cast<std::size_t>(s)];
    if (x != y) CHECK(std::abs(q(s, x) - q(s, y)) < 1e-8);
  }
}

}  // namespace

TEST_CASE("the two-state chain under every solver") {
  const Mdp chain = two_state_chain(0.5);
  const ValueFn expected(std::vector<double>{1.0, 0.0});
  for (const auto& r : {policy_iteration(chain, 1e-10), value_iteration(chain, 1e-10),
                        gpi(chain, 2, 3, 1e-10)}) {
    CHECK(actions(r.policy)[0] == kGo);
    CHECK(sup_distance(r.v, expected) < 1e-10);
  }
  const Policy go(Policy::Deterministic{{kGo, kGo}});
  CHECK(policy_evaluation(chain, go, 1e-10) == expected);
}

TEST_CASE("zero discount evaluates in one sweep") {
  const Mdp chain = two_state_chain(0.5).with_gamma(0.0);
  std::vector<ValueFn> iterates;
  const auto e = evaluate_policy(chain, uniform_policy(2, 2), 1e-10, {}, kMaxSweeps,
                                 [&](const ValueFn& v) { iterates.push_back(v); });
  CHECK(iterates.front() == ValueFn(std::vector<double>{0.5, 0.0}));
  CHECK(e.v == iterates.front());
  CHECK(e.sweeps == 2);
}

TEST_CASE("evaluation error stays inside the contraction bound") {
  testgen::Gen g(71);
  for (int trial = 0; trial < 100; ++trial) {
    const double gamma = std::array{0.5, 0.9, 0.99}[static_cast<std::size_t>(trial % 3)];
    const Mdp m = testgen::random_mdp(g, gamma);
    const Policy pi = testgen::random_deterministic_policy(g, m.num_states(), m.num_actions());
    const double tol = std::array{1e-3, 1e-6, 1e-9}[static_cast<std::size_t>(trial % 3)];
    const ValueFn v = policy_evaluation(m, pi, tol);
    const auto exact = solve_policy(m, actions(pi));
    for (State s = 0; s < m.num_states(); ++s) {
      CHECK(std::abs(v[s] - exact[static_cast<std::size_t>(s)]) <=
            tol * gamma / (1 - gamma) + 1e-12);
    }
  }
}

TEST_CASE("solvers reach the brute-force optimum") {
  testgen::Gen g(72);
  for (int trial = 0; trial < 150; ++trial) {
    const Mdp m = testgen::random_mdp(g, trial % 2 ? 0.9 : 0.5,
                                      {.max_states = 4, .max_actions = 2, .min_actions = 2});
    const auto best = brute_force_optimum(m);
    const DpResult vi = value_iteration(m, 1e-11);
    const DpResult pit = policy_iteration(m, 1e-11);
    const DpResult gp = gpi(m, 1, 3, 1e-11);
    for (const auto* r : {&vi, &pit, &gp}) {
      const auto achieved = solve_policy(m, actions(r->policy));
      for (State s = 0; s < m.num_states(); ++s) {
        const auto i = static_cast<std::size_t>(s);
        CHECK(std::abs(achieved[i] - best[i]) < 1e-8);
        CHECK(std::abs(r->v[s] - best[i]) < 1e-8);
      }
    }
    check_same_greedy_choice(m, vi, pit);
    check_same_greedy_choice(m, vi, gp);
  }
}

TEST_CASE("corner gridworld values are shortest-path returns") {
  const double gamma = 0.9;
  const DpResult vi = value_iteration(corner_gridworld(gamma), 1e-12);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int d = std::min(r + c, (3 - r) + (3 - c));
      const double expected = -(1 - std::pow(gamma, d)) / (1 - gamma);
      CHECK(std::abs(vi.v[r * 4 + c] - expected) < 1e-9);
    }
  }
}

TEST_CASE("gpi(1, 1) is value iteration, iterate for iterate") {
  testgen::Gen g(73);
  for (int trial = 0; trial < 50; ++trial) {
    const Mdp m = testgen::random_mdp(g, 0.9);
    std::vector<ValueFn> a, b;
    const auto ra = gpi(m, 1, 1, 1e-10, [&](const ValueFn& v) { a.push_back(v); });
    const auto rb = value_iteration(m, 1e-10, [&](const ValueFn& v) { b.push_back(v); });
    CHECK(a == b);
    CHECK(actions(ra.policy) == actions(rb.policy));
  }
}

TEST_CASE("value iteration matches the direct loop") {
  testgen::Gen g(74);
  std::vector<Mdp> cases{corner_gridworld(0.9), cliff_walking(0.99), two_state_chain(0.5)};
  for (int i = 0; i < 60; ++i) cases.push_back(testgen::random_mdp(g, 0.9));
  for (const Mdp& m : cases) {
    std::vector<ValueFn> ours;
    value_iteration(m, 1e-10, [&](const ValueFn& v) { ours.push_back(v); });
    const auto direct = oracles::oracle_value_iteration(m, 1e-10);
    const std::size_t common = std::min(ours.size(), direct.size());
    CHECK(common > 0);
    for (std::size_t k = 0; k < common; ++k) {
      for (State s = 0; s < m.num_states(); ++s) {
        const double scale = 1 + std::abs(ours[k][s]);
        CHECK(std::abs(ours[k][s] - direct[k][static_cast<std::size_t>(s)]) < 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("dynamic programming preconditions") {
  const Mdp undiscounted = two_state_chain(1.0);
  CHECK_THROWS_AS(value_iteration(undiscounted, 1e-6), DomainError);
  CHECK_THROWS_AS(policy_iteration(undiscounted, 1e-6), DomainError);
  CHECK_THROWS_AS(policy_evaluation(undiscounted, uniform_policy(2, 2), 1e-6), DomainError);
  CHECK_THROWS_AS(value_iteration(two_state_chain(0.5), 0.0), DomainError);
  CHECK_THROWS_AS(gpi(two_state_chain(0.5), 0, 1, 1e-6), DomainError);
  CHECK_THROWS_AS(evaluate_policy(chain_mrp(5, {}, 0.99), uniform_policy(7, 1), 1e-12, {}, 3),
                  NonConvergence);
}
