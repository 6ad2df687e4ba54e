#pragma once

// A minimal reverse-mode gradient engine. Every run builds its own tape;
// nodes record their value and the partial derivative towards each input.
// The op set is deliberately small: affine maps, tanh, log-softmax, square,
// sums, and the scalar arithmetic needed to assemble losses from them.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace catrl::approx {

class Tape;

class Var {
 public:
  Var() = default;
  double value() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  Var leaf(double value);
  std::vector<Var> leaves(std::span<const double> values);

  double value(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].value; }

  // d output / d v for every listed v.
  std::vector<double> gradient(Var output, std::span<const Var> wrt) const;

  // A node with the given value and (input, ∂value/∂input) edges.
  Var record(double value, std::span<const std::pair<Var, double>> edges);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    double value;
    std::size_t edges_begin;
    std::size_t edges_end;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<int, double>> edges_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double c, Var a);
Var operator+(Var a, double c);
Var tanh(Var a);
Var square(Var a);
Var sum(std::span<const Var> xs);

// log p_i = x_i − log Σ_j exp(x_j), max-subtracted.
std::vector<Var> log_softmax(std::span<const Var> xs);

// acc = bias, then acc += w_j·x_j for j ascending. Shared by the plain and
// the recorded evaluation so both produce bit-identical values.
inline double affine_value(std::span<const double> w, std::span<const double> x, double bias) {
  double acc = bias;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * x[j];
  return acc;
}

// Σ_j w_j·x_j + b as a single node; `bias` may be omitted (null Var).
Var affine(std::span<const Var> w, std::span<const Var> x, Var bias);

enum class Activation { kIdentity, kTanh };

// "identity" / "linear" / "tanh"; anything else throws UnsupportedOp.
Activation activation_from_name(std::string_view name);

// ∇f at theta by one reverse sweep.
std::vector<double> grad(const std::function<Var(Tape&, std::span<const Var>)>& f,
                         std::span<const double> theta);

}  // namespace catrl::approx
