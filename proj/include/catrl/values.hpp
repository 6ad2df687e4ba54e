#pragma once

// Value functions, Q-tables, and their update targets.

#include <cstddef>
#include <span>
#include <vector>

namespace catrl {

using State = int;
using Action = int;

class ValueFn {
 public:
  ValueFn() = default;
  explicit ValueFn(int num_states, double fill = 0.0)
      : v_(static_cast<std::size_t>(num_states), fill) {}
  explicit ValueFn(std::vector<double> values) : v_(std::move(values)) {}

  int num_states() const { return static_cast<int>(v_.size()); }
  double operator[](State s) const { return v_[static_cast<std::size_t>(s)]; }
  double& operator[](State s) { return v_[static_cast<std::size_t>(s)]; }
  std::span<const double> values() const { return v_; }

  friend ValueFn operator+(const ValueFn& a, const ValueFn& b);
  friend ValueFn operator-(const ValueFn& a, const ValueFn& b);
  friend ValueFn operator*(double w, const ValueFn& a);
  friend bool operator==(const ValueFn&, const ValueFn&) = default;

 private:
  std::vector<double> v_;
};

// Supremum norm.
double sup_norm(const ValueFn& v);
double sup_distance(const ValueFn& a, const ValueFn& b);

class QTable {
 public:
  QTable() = default;
  QTable(int num_states, int num_actions, double fill = 0.0)
      : num_states_(num_states),
        num_actions_(num_actions),
        q_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions),
           fill) {}

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double operator()(State s, Action a) const { return q_[index(s, a)]; }
  double& operator()(State s, Action a) { return q_[index(s, a)]; }

  std::span<const double> row(State s) const {
    return std::span<const double>(q_).subspan(index(s, 0),
                                               static_cast<std::size_t>(num_actions_));
  }
  std::span<const double> data() const { return q_; }
  std::span<double> data() { return q_; }

  friend QTable operator+(const QTable& a, const QTable& b);
  friend QTable operator*(double w, const QTable& a);
  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t index(State s, Action a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
           static_cast<std::size_t>(a);
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> q_;
};

double max_abs_difference(const QTable& a, const QTable& b);

// A single-entry update target: the new value G for Q(s, a).
struct QDelta {
  State s;
  Action a;
  double target;
  friend bool operator==(const QDelta&, const QDelta&) = default;
};

// A full-sweep target for every state (the dynamic-programming case).
struct VDelta {
  ValueFn target;
};

}  // namespace catrl
