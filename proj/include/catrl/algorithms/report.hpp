#pragma once

// Training budgets, learning curves and the per-step trace hook.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "catrl/values.hpp"

namespace catrl::algorithms {

// Stop after `episodes` completed episodes or `steps` environment steps,
// whichever comes first; 0 means no limit on that count.
struct Budget {
  std::size_t episodes = 0;
  std::size_t steps = 0;

  static Budget of_episodes(std::size_t n) { return {n, 0}; }
  static Budget of_steps(std::size_t n) { return {0, n}; }
  bool reached(std::size_t episodes_done, std::size_t steps_done) const {
    return (episodes > 0 && episodes_done >= episodes) || (steps > 0 && steps_done >= steps);
  }
  // Throws ConfigError when neither limit is set.
  void validate() const;
};

enum class CurveUnit { kEpisode, kStep };

struct CurvePoint {
  std::size_t index;
  double ret;  // undiscounted reward sum (a single reward for step curves)
  double max_q_change;
  std::size_t length;
};

struct TrainReport {
  CurveUnit unit = CurveUnit::kEpisode;
  std::vector<CurvePoint> curve;
  QTable q;
  std::size_t steps = 0;
  std::uint64_t seed = 0;

  double mean_return() const;
};

// Header "episode,return,max_q_change" (or "step,…"), one row per point.
void write_curve_csv(std::ostream& out, const TrainReport& report);

// Accumulates curve points from per-step rewards. Only completed episodes
// produce a point.
class CurveBuilder {
 public:
  CurveBuilder(CurveUnit unit, QTable q0) : unit_(unit), reference_(std::move(q0)) {}

  void record(double reward, bool episode_end, const QTable& q);

  std::size_t episodes() const { return episodes_; }
  std::size_t steps() const { return steps_; }
  std::vector<CurvePoint> take() { return std::move(curve_); }

 private:
  CurveUnit unit_;
  QTable reference_;
  std::vector<CurvePoint> curve_;
  double running_ = 0.0;
  std::size_t length_ = 0;
  std::size_t episodes_ = 0;
  std::size_t steps_ = 0;
};

// Called after every environment step with the step taken and the table the
// agent will act on next. `target_action` is the successor action the update
// target looked at (a' for SARSA, the greedy action for Q-learning), or -1
// when the target uses no single action.
struct StepTrace {
  std::size_t step;
  State s;
  Action a;
  double reward;
  State next;
  bool episode_end;
  Action target_action;
  const QTable& q;
};
using StepObserver = std::function<void(const StepTrace&)>;

}  // namespace catrl::algorithms
