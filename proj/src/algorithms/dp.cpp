#include "catrl/algorithms/dp.hpp"

#include <optional>
#include <vector>

#include "catrl/errors.hpp"

namespace catrl::algorithms {
namespace {

void check_problem(const Mdp& mdp, double tol) {
  if (!(mdp.gamma() < 1.0)) throw DomainError("dynamic programming needs gamma < 1");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
}

const std::vector<Action>& actions_of(const Policy& pi) { return pi.as_deterministic()->actions; }

}  // namespace

Evaluation evaluate_policy(const Mdp& mdp, const Policy& pi, double tol, ValueFn start,
                           std::size_t max_sweeps, const ValueObserver& observe) {
  check_problem(mdp, tol);
  ValueFn v = start.num_states() == 0 ? ValueFn(mdp.num_states()) : std::move(start);
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    ValueFn next = value_improve(mdp, pi, v);
    const double residual = sup_distance(next, v);
    v = std::move(next);
    if (observe) observe(v);
    if (residual < tol) return {std::move(v), sweep};
  }
  throw NonConvergence("policy evaluation did not converge within the sweep cap");
}

ValueFn policy_evaluation(const Mdp& mdp, const Policy& pi, double tol) {
  return evaluate_policy(mdp, pi, tol).v;
}

DpResult policy_iteration(const Mdp& mdp, double tol, const ValueObserver& observe) {
  check_problem(mdp, tol);
  ValueFn v(mdp.num_states());
  std::optional<std::vector<Action>> previous;
  std::size_t sweeps = 0;
  for (std::size_t round = 1; round <= kMaxSweeps; ++round) {
    Policy pi = policy_improve(mdp, v);
    Evaluation e = evaluate_policy(mdp, pi, tol, std::move(v), kMaxSweeps, observe);
    v = std::move(e.v);
    sweeps += e.sweeps;
    if (previous && *previous == actions_of(pi)) return {std::move(v), std::move(pi), sweeps, round};
    previous = actions_of(pi);
  }
  throw NonConvergence("policy iteration did not stabilize");
}

DpResult gpi(const Mdp& mdp, int m, int n, double tol, const ValueObserver& observe) {
  check_problem(mdp, tol);
  if (m < 1 || n < 1) throw DomainError("gpi needs m, n >= 1");
  ValueFn v(mdp.num_states());
  std::optional<std::vector<Action>> previous;
  std::size_t sweeps = 0;
  for (std::size_t round = 1; sweeps < kMaxSweeps; ++round) {
    // Improvement against a fixed V is idempotent, so m rounds of it land on
    // the same policy; they are still run to keep the schedule literal.
    Policy pi = policy_improve(mdp, v);
    for (int i = 1; i < m; ++i) pi = policy_improve(mdp, v);
    double residual = 0.0;
    for (int j = 0; j < n; ++j) {
      ValueFn next = value_improve(mdp, pi, v);
      residual = sup_distance(next, v);
      v = std::move(next);
      ++sweeps;
      if (observe) observe(v);
    }
    const bool stable = previous && *previous == actions_of(pi);
    if (stable && residual < tol) return {std::move(v), std::move(pi), sweeps, round};
    previous = actions_of(pi);
  }
  throw NonConvergence("generalized policy iteration did not converge within the sweep cap");
}

DpResult value_iteration(const Mdp& mdp, double tol, const ValueObserver& observe) {
  return gpi(mdp, 1, 1, tol, observe);
}

}  // namespace catrl::algorithms
