#pragma once

// The environment catalog: desk-scale MDPs, and environments as iteration
// contexts (combs) for agents (S/1) -> (A/F).

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "catrl/iteration.hpp"
#include "catrl/mdp.hpp"

namespace catrl {

struct Cell {
  int row;
  int col;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Grid actions.
inline constexpr Action kUp = 0;
inline constexpr Action kRight = 1;
inline constexpr Action kDown = 2;
inline constexpr Action kLeft = 3;

struct GridSpec {
  int width = 4;
  int height = 4;
  std::vector<Cell> walls;
  std::vector<Cell> goals;  // empty: bottom-right corner
  std::vector<Cell> starts;  // empty: uniform over open non-goal cells
  double goal_reward = 0.0;  // added when a move enters a goal
  double step_reward = -1.0;  // paid by every move
  double gamma = 0.9;
};

// Deterministic 4-action grid. Wall cells are not states; moves into walls or
// off the grid stay put. Goals are terminal. Throws ConfigError on bad
// dimensions or cells out of range.
Mdp gridworld(const GridSpec& spec);
Mdp gridworld(int width, int height, std::vector<Cell> walls, double goal_reward,
              double step_reward);

// State id of a grid cell in an MDP built by `gridworld`, or nullopt for walls.
std::optional<State> grid_state(const GridSpec& spec, Cell cell);

// 4×4 grid with terminal corners (0,0) and (3,3), reward -1 per move.
Mdp corner_gridworld(double gamma = 0.9);

// 4×12 grid: start bottom-left, goal bottom-right, the cells between them are
// a cliff costing -100 and sending the agent back to the start.
Mdp cliff_walking(double gamma = 0.99);
inline constexpr int kCliffWidth = 12;
inline constexpr int kCliffHeight = 4;
inline State cliff_state(int row, int col) { return row * kCliffWidth + col; }

// States {s0, s1}, actions {stay = 0, go = 1}. go moves s0 -> s1 with reward
// 1, stay keeps s0 with reward 0, s1 is terminal.
inline constexpr Action kStay = 0;
inline constexpr Action kGo = 1;
Mdp two_state_chain(double gamma = 0.5);

struct ChainRewards {
  double left_exit = 0.0;
  double right_exit = 1.0;
  double step = 0.0;
};

// Random walk over n non-terminal states 0..n-1 between two terminal ends
// (states n and n+1). Starts in the middle; moves right with p_right.
Mrp chain_mrp(int n, ChainRewards rewards = {}, double gamma = 0.9, double p_right = 0.5);

// The reward process of an MDP run under a fixed policy.
Mrp induced_mrp(const Mdp& mdp, const Policy& policy);

// What an online environment answers to an action.
struct Feedback {
  Action action;  // the action the environment executed
  double reward;
  State next;
  bool terminal;
  bool episode_end;  // terminal, or cut at the length cap
  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct EpisodeMode {
  // 0 = continuing (resets only at terminals).
  int max_length = 0;
  static EpisodeMode continuing() { return {0}; }
  static EpisodeMode episodic(int max_length) { return {max_length}; }
};

struct EnvCursor {
  State s;
  int t;
  friend bool operator==(const EnvCursor&, const EnvCursor&) = default;
};

struct PendingMove {
  State next;
  int t;
  bool reset;
  friend bool operator==(const PendingMove&, const PendingMove&) = default;
};

using MdpComb = iteration::EnvComb<EnvCursor, PendingMove, State, Unit, Action, Feedback>;

// The MDP as a comb over the Markov chain's states. The continuation draws
// (s', r) ~ t(s, a) (one env draw); the step either continues from s' or, at
// a terminal or the cap, redraws from the start distribution (one env draw).
MdpComb mdp_to_comb(const Mdp& mdp, EpisodeMode mode);

// Multi-armed bandit: only the continuation k : A -> F is non-trivial.
using BanditComb = iteration::EnvComb<Unit, Unit, Unit, Unit, Action, double>;
BanditComb multi_armed_bandit(std::vector<FiniteDist<double>> arms);

// Contexts are redrawn each step independently of the action.
using ContextualComb = iteration::EnvComb<State, Unit, State, Unit, Action, double>;
ContextualComb contextual_bandit(FiniteDist<State> contexts, int num_actions,
                                 std::function<FiniteDist<double>(State, Action)> payoff);

struct LoggedStep {
  State s;
  Action a;
  Feedback f;
};

enum class ReplayOrder { kUniform, kSequential };

// Replays a dataset; the agent's action is ignored and the logged action and
// feedback are projected back. The comb state is the dataset index.
using OfflineComb =
    iteration::EnvComb<std::size_t, std::size_t, State, Unit, Action, Feedback>;
OfflineComb offline_env(std::vector<LoggedStep> dataset, ReplayOrder order);

}  // namespace catrl
