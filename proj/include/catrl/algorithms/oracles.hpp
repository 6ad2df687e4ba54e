#pragma once

// Direct textbook loops for every learning algorithm. They share only the
// distribution/rng layer, the MDP tables, and the draw-order contract with
// the compositional builds: no optics, parametrised lenses, iterations,
// policies or Bellman helpers are used here.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "catrl/algorithms/control.hpp"

namespace catrl::oracles {

using algorithms::ControlParams;

// Sees the flat row-major table after every environment step.
using TableObserver = std::function<void(std::size_t step, std::span<const double> q)>;

struct OracleRun {
  std::vector<double> q;  // row-major S × A
  std::vector<double> returns;  // per completed episode (per step for bandits)
  std::size_t steps = 0;
};

OracleRun oracle_sarsa(const Mdp& mdp, const ControlParams& p, const TableObserver& observe = {});
OracleRun oracle_q_learning(const Mdp& mdp, const ControlParams& p,
                            const TableObserver& observe = {});
OracleRun oracle_expected_sarsa(const Mdp& mdp, const ControlParams& p,
                                const TableObserver& observe = {});
OracleRun oracle_n_step_sarsa(const Mdp& mdp, int n, const ControlParams& p,
                              const TableObserver& observe = {});
OracleRun oracle_mc(const Mdp& mdp, const ControlParams& p, const TableObserver& observe = {});
OracleRun oracle_td0(const Mrp& mrp, const ControlParams& p, const TableObserver& observe = {});
OracleRun oracle_mc_prediction(const Mrp& mrp, const ControlParams& p,
                               const TableObserver& observe = {});
OracleRun oracle_bandit(const std::vector<FiniteDist<double>>& arms, const ControlParams& p,
                        const TableObserver& observe = {});

// Classic value iteration V ← max_a Σ p(s', r | s, a)(r + γV(s')) until the
// sup-norm change drops below tol; returns every iterate.
std::vector<std::vector<double>> oracle_value_iteration(const Mdp& mdp, double tol);

}  // namespace catrl::oracles
