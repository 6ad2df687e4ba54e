#include "catrl/environments.hpp"

#include <algorithm>
#include <memory>
#include <string>

#include "catrl/errors.hpp"

namespace catrl {
namespace {

bool in_grid(const GridSpec& spec, Cell c) {
  return c.row >= 0 && c.row < spec.height && c.col >= 0 && c.col < spec.width;
}

bool contains(const std::vector<Cell>& cells, Cell c) {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

Cell move(Cell c, Action a) {
  switch (a) {
    case kUp: return {c.row - 1, c.col};
    case kRight: return {c.row, c.col + 1};
    case kDown: return {c.row + 1, c.col};
    default: return {c.row, c.col - 1};
  }
}

std::string cell_label(Cell c) {
  return std::to_string(c.row) + ":" + std::to_string(c.col);
}

}  // namespace

std::optional<State> grid_state(const GridSpec& spec, Cell cell) {
  if (!in_grid(spec, cell) || contains(spec.walls, cell)) return std::nullopt;
  State id = 0;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const Cell here{r, c};
      if (contains(spec.walls, here)) continue;
      if (here == cell) return id;
      ++id;
    }
  }
  return std::nullopt;
}

Mdp gridworld(const GridSpec& spec_in) {
  GridSpec spec = spec_in;
  if (spec.width < 1 || spec.height < 1) {
    throw ConfigError("gridworld: width and height must be >= 1");
  }
  for (const Cell& w : spec.walls) {
    if (!in_grid(spec, w)) throw ConfigError("gridworld: wall " + cell_label(w) + " out of range");
  }
  if (spec.goals.empty()) spec.goals.push_back({spec.height - 1, spec.width - 1});
  for (const Cell& g : spec.goals) {
    if (!in_grid(spec, g) || contains(spec.walls, g)) {
      throw ConfigError("gridworld: goal " + cell_label(g) + " out of range or walled");
    }
  }
  for (const Cell& s : spec.starts) {
    if (!in_grid(spec, s) || contains(spec.walls, s)) {
      throw ConfigError("gridworld: start " + cell_label(s) + " out of range or walled");
    }
  }

  std::vector<Cell> cells;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      if (!contains(spec.walls, {r, c})) cells.push_back({r, c});
    }
  }
  if (cells.empty()) throw ConfigError("gridworld: every cell is a wall");
  const auto id_of = [&](Cell c) {
    return static_cast<State>(std::find(cells.begin(), cells.end(), c) - cells.begin());
  };

  const int n = static_cast<int>(cells.size());
  std::vector<FiniteDist<Outcome>> transitions;
  std::vector<bool> terminals;
  std::vector<std::string> labels;
  for (State s = 0; s < n; ++s) {
    const Cell here = cells[static_cast<std::size_t>(s)];
    const bool goal = contains(spec.goals, here);
    terminals.push_back(goal);
    labels.push_back(cell_label(here));
    for (Action a = 0; a < 4; ++a) {
      if (goal) {
        transitions.push_back(dirac(Outcome{s, 0.0}));
        continue;
      }
      Cell target = move(here, a);
      if (!in_grid(spec, target) || contains(spec.walls, target)) target = here;
      const double reward =
          spec.step_reward + (contains(spec.goals, target) ? spec.goal_reward : 0.0);
      transitions.push_back(dirac(Outcome{id_of(target), reward}));
    }
  }

  std::vector<State> starts;
  if (spec.starts.empty()) {
    for (State s = 0; s < n; ++s) {
      if (!terminals[static_cast<std::size_t>(s)]) starts.push_back(s);
    }
  } else {
    for (const Cell& c : spec.starts) starts.push_back(id_of(c));
  }
  if (starts.empty()) throw ConfigError("gridworld: no start cell");
  return Mdp(n, 4, std::move(transitions), spec.gamma, std::move(terminals),
             FiniteDist<State>::uniform(std::move(starts)), std::move(labels));
}

Mdp gridworld(int width, int height, std::vector<Cell> walls, double goal_reward,
              double step_reward) {
  GridSpec spec;
  spec.width = width;
  spec.height = height;
  spec.walls = std::move(walls);
  spec.goal_reward = goal_reward;
  spec.step_reward = step_reward;
  return gridworld(spec);
}

Mdp corner_gridworld(double gamma) {
  GridSpec spec;
  spec.goals = {{0, 0}, {3, 3}};
  spec.gamma = gamma;
  return gridworld(spec);
}

Mdp cliff_walking(double gamma) {
  const State start = cliff_state(kCliffHeight - 1, 0);
  const State goal = cliff_state(kCliffHeight - 1, kCliffWidth - 1);
  const auto is_cliff = [](int r, int c) {
    return r == kCliffHeight - 1 && c > 0 && c < kCliffWidth - 1;
  };
  std::vector<FiniteDist<Outcome>> transitions;
  std::vector<bool> terminals;
  std::vector<std::string> labels;
  for (int r = 0; r < kCliffHeight; ++r) {
    for (int c = 0; c < kCliffWidth; ++c) {
      const State s = cliff_state(r, c);
      terminals.push_back(s == goal);
      labels.push_back(cell_label({r, c}));
      for (Action a = 0; a < 4; ++a) {
        if (s == goal) {
          transitions.push_back(dirac(Outcome{s, 0.0}));
        } else if (is_cliff(r, c)) {
          // Never entered: stepping onto the cliff teleports to the start.
          transitions.push_back(dirac(Outcome{start, -100.0}));
        } else {
          Cell t = move({r, c}, a);
          if (t.row < 0 || t.row >= kCliffHeight || t.col < 0 || t.col >= kCliffWidth) {
            t = {r, c};
          }
          if (is_cliff(t.row, t.col)) {
            transitions.push_back(dirac(Outcome{start, -100.0}));
          } else {
            transitions.push_back(dirac(Outcome{cliff_state(t.row, t.col), -1.0}));
          }
        }
      }
    }
  }
  return Mdp(kCliffWidth * kCliffHeight, 4, std::move(transitions), gamma,
             std::move(terminals), dirac(start), std::move(labels));
}

Mdp two_state_chain(double gamma) {
  std::vector<FiniteDist<Outcome>> transitions = {
      dirac(Outcome{0, 0.0}),  // s0, stay
      dirac(Outcome{1, 1.0}),  // s0, go
      dirac(Outcome{1, 0.0}),  // s1, stay
      dirac(Outcome{1, 0.0}),  // s1, go
  };
  return Mdp(2, 2, std::move(transitions), gamma, {false, true}, dirac(State{0}),
             {"s0", "s1"});
}

Mrp chain_mrp(int n, ChainRewards rewards, double gamma, double p_right) {
  if (n < 1) throw ConfigError("chain_mrp: need n >= 1");
  if (!(p_right >= 0.0 && p_right <= 1.0)) throw ConfigError("chain_mrp: p_right in [0,1]");
  const State left_end = n;
  const State right_end = n + 1;
  std::vector<FiniteDist<Outcome>> transitions;
  std::vector<bool> terminals(static_cast<std::size_t>(n + 2), false);
  terminals[static_cast<std::size_t>(left_end)] = true;
  terminals[static_cast<std::size_t>(right_end)] = true;
  for (State s = 0; s < n; ++s) {
    const Outcome right = s + 1 < n ? Outcome{s + 1, rewards.step}
                                    : Outcome{right_end, rewards.right_exit};
    const Outcome left = s > 0 ? Outcome{s - 1, rewards.step}
                               : Outcome{left_end, rewards.left_exit};
    transitions.push_back(FiniteDist<Outcome>({{right, p_right}, {left, 1.0 - p_right}}));
  }
  transitions.push_back(dirac(Outcome{left_end, 0.0}));
  transitions.push_back(dirac(Outcome{right_end, 0.0}));
  return Mdp(n + 2, 1, std::move(transitions), gamma, std::move(terminals),
             dirac(State{(n - 1) / 2}));
}

Mrp induced_mrp(const Mdp& mdp, const Policy& policy) {
  std::vector<FiniteDist<Outcome>> transitions;
  std::vector<bool> terminals;
  std::vector<std::string> labels;
  for (State s = 0; s < mdp.num_states(); ++s) {
    terminals.push_back(mdp.is_terminal(s));
    labels.push_back(mdp.label(s));
    if (mdp.is_terminal(s)) {
      transitions.push_back(dirac(Outcome{s, 0.0}));
    } else {
      transitions.push_back(catrl::bind(policy.action_distribution(s),
                                 [&](Action a) { return mdp.transition(s, a); }));
    }
  }
  return Mdp(mdp.num_states(), 1, std::move(transitions), mdp.gamma(), std::move(terminals),
             mdp.start(), std::move(labels));
}

MdpComb mdp_to_comb(const Mdp& mdp_in, EpisodeMode mode) {
  auto mdp = std::make_shared<const Mdp>(mdp_in);
  const int cap = mode.max_length;
  auto init = pushforward(mdp->start(), [](State s) {
    return std::pair<EnvCursor, State>{EnvCursor{s, 0}, s};
  });
  auto continuation = [mdp, cap](const EnvCursor& m, const Action& a, RngState rng) {
    const auto [outcome, next_rng] = sample(mdp->transition(m.s, a), rng);
    const int t = m.t + 1;
    const bool terminal = mdp->is_terminal(outcome.next);
    const bool end = terminal || (cap > 0 && t >= cap);
    return iteration::Emit<PendingMove, Feedback>{
        PendingMove{outcome.next, t, end},
        Feedback{a, outcome.reward, outcome.next, terminal, end}, next_rng};
  };
  auto step = [mdp](const PendingMove& p, const Unit&, RngState rng) {
    if (!p.reset) return iteration::Emit<EnvCursor, State>{EnvCursor{p.next, p.t}, p.next, rng};
    const auto [s0, next_rng] = sample(mdp->start(), rng);
    return iteration::Emit<EnvCursor, State>{EnvCursor{s0, 0}, s0, next_rng};
  };
  return {std::move(init), std::move(continuation), std::move(step)};
}

BanditComb multi_armed_bandit(std::vector<FiniteDist<double>> arms_in) {
  if (arms_in.empty()) throw ConfigError("multi_armed_bandit: no arms");
  auto arms = std::make_shared<const std::vector<FiniteDist<double>>>(std::move(arms_in));
  return {dirac(std::pair<Unit, Unit>{}),
          [arms](const Unit&, const Action& a, RngState rng) {
            if (a < 0 || static_cast<std::size_t>(a) >= arms->size()) {
              throw DomainError("multi_armed_bandit: arm out of range");
            }
            const auto [r, next] = sample((*arms)[static_cast<std::size_t>(a)], rng);
            return iteration::Emit<Unit, double>{Unit{}, r, next};
          },
          [](const Unit&, const Unit&, RngState rng) {
            return iteration::Emit<Unit, Unit>{Unit{}, Unit{}, rng};
          }};
}

ContextualComb contextual_bandit(FiniteDist<State> contexts, int num_actions,
                                 std::function<FiniteDist<double>(State, Action)> payoff) {
  if (num_actions < 1) throw ConfigError("contextual_bandit: no actions");
  auto init = pushforward(contexts, [](State s) { return std::pair<State, State>{s, s}; });
  return {std::move(init),
          [payoff = std::move(payoff), num_actions](const State& s, const Action& a,
                                                    RngState rng) {
            if (a < 0 || a >= num_actions) throw DomainError("contextual_bandit: bad action");
            const auto [r, next] = sample(payoff(s, a), rng);
            return iteration::Emit<Unit, double>{Unit{}, r, next};
          },
          [contexts](const Unit&, const Unit&, RngState rng) {
            const auto [s, next] = sample(contexts, rng);
            return iteration::Emit<State, State>{s, s, next};
          }};
}

OfflineComb offline_env(std::vector<LoggedStep> dataset_in, ReplayOrder order) {
  if (dataset_in.empty()) throw ConfigError("offline_env: empty dataset");
  auto dataset = std::make_shared<const std::vector<LoggedStep>>(std::move(dataset_in));
  std::vector<std::pair<std::size_t, State>> indexed;
  for (std::size_t i = 0; i < dataset->size(); ++i) indexed.emplace_back(i, (*dataset)[i].s);
  const auto uniform = FiniteDist<std::pair<std::size_t, State>>::uniform(indexed);
  auto init = order == ReplayOrder::kUniform ? uniform : dirac(indexed.front());
  return {std::move(init),
          [dataset](const std::size_t& i, const Action&, RngState rng) {
            Feedback f = (*dataset)[i].f;
            f.action = (*dataset)[i].a;
            return iteration::Emit<std::size_t, Feedback>{i, f, rng};
          },
          [dataset, uniform, order](const std::size_t& i, const Unit&, RngState rng) {
            if (order == ReplayOrder::kSequential) {
              const std::size_t j = (i + 1) % dataset->size();
              return iteration::Emit<std::size_t, State>{j, (*dataset)[j].s, rng};
            }
            const auto [next, after] = sample(uniform, rng);
            return iteration::Emit<std::size_t, State>{next.first, next.second, after};
          }};
}

}  // namespace catrl
