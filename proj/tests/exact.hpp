#pragma once
// Exact MDP answers by linear algebra and enumeration, independent of the
// iterative solvers.

#include <algorithm>
#include <cmath>
#include <vector>

#include "catrl/mdp.hpp"

namespace catrl::exact {

// Solves (I − γP)V = R for a deterministic policy by Gaussian elimination with
// partial pivoting. Terminal rows are V(s) = 0.
inline std::vector<double> solve_policy(const Mdp& m, const std::vector<Action>& pi) {
  const auto n = static_cast<std::size_t>(m.num_states());
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    a[s][s] = 1.0;
    if (m.is_terminal(static_cast<State>(s))) continue;
    for (const auto& o : m.transition(static_cast<State>(s), pi[s])) {
      a[s][static_cast<std::size_t>(o.value.next)] -= m.gamma() * o.weight;
      a[s][n] += o.weight * o.value.reward;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> v(n);
  for (std::size_t s = 0; s < n; ++s) v[s] = a[s][n] / a[s][s];
  return v;
}

// Optimal values by enumerating every deterministic policy.
inline std::vector<double> brute_force_optimum(const Mdp& m) {
  const auto n = static_cast<std::size_t>(m.num_states());
  std::vector<double> best(n, -INFINITY);
  std::vector<Action> pi(n, 0);
  while (true) {
    const auto v = solve_policy(m, pi);
    for (std::size_t s = 0; s < n; ++s) best[s] = std::max(best[s], v[s]);
    std::size_t i = 0;
    while (i < n && ++pi[i] == m.num_actions()) pi[i++] = 0;
    if (i == n) break;
  }
  return best;
}

}  // namespace catrl::exact
