#pragma once

// Dynamic programming as fixpoints of the Bellman operators:
//   policy iteration   (B_pol ∘ B_val^†)^†
//   value iteration    (B_pol ∘ B_val)^†
//   generalized PI     (B_pol^m ∘ B_val^n)^†
// All of them require γ < 1 and throw DomainError otherwise.

#include <cstddef>
#include <functional>

#include "catrl/bellman.hpp"

namespace catrl::algorithms {

inline constexpr std::size_t kMaxSweeps = 1'000'000;

// Called with every value iterate, in order.
using ValueObserver = std::function<void(const ValueFn&)>;

struct Evaluation {
  ValueFn v;
  std::size_t sweeps = 0;
};

// Iterates value_improve from `start` (zero when empty) until consecutive
// iterates are within tol in sup-norm. Throws NonConvergence after
// max_sweeps.
Evaluation evaluate_policy(const Mdp& mdp, const Policy& pi, double tol, ValueFn start = {},
                           std::size_t max_sweeps = kMaxSweeps,
                           const ValueObserver& observe = {});

ValueFn policy_evaluation(const Mdp& mdp, const Policy& pi, double tol);

struct DpResult {
  ValueFn v;
  Policy policy;
  std::size_t sweeps = 0;
  std::size_t improvements = 0;
};

// Stops once the greedy policy repeats and the last value residual is below
// tol. Each evaluation is warm-started from the previous values.
DpResult policy_iteration(const Mdp& mdp, double tol, const ValueObserver& observe = {});

// m policy improvements then n value sweeps per round, until the policy is
// stable and the last sweep moved V by less than tol.
DpResult gpi(const Mdp& mdp, int m, int n, double tol, const ValueObserver& observe = {});

// gpi with m = n = 1.
DpResult value_iteration(const Mdp& mdp, double tol, const ValueObserver& observe = {});

}  // namespace catrl::algorithms
