#pragma once

// Flat parameter vectors and small Q-networks over one-hot state features.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "catrl/approx/tape.hpp"
#include "catrl/values.hpp"

namespace catrl::approx {

// A named row-major matrix inside the flat vector.
struct Block {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Block&, const Block&) = default;
};

class ParamVector {
 public:
  ParamVector() = default;
  // Throws DomainError unless the blocks tile [0, theta.size()) exactly and
  // every entry is finite.
  ParamVector(std::vector<Block> layout, std::vector<double> theta);

  static ParamVector zeros(std::vector<Block> layout);

  std::size_t size() const { return theta_.size(); }
  std::span<const double> values() const { return theta_; }
  const std::vector<Block>& layout() const { return layout_; }
  const Block& block(const std::string& name) const;
  std::span<const double> block_values(const std::string& name) const;

  // θ + Δ, entrywise.
  ParamVector plus(std::span<const double> delta) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<Block> layout_;
  std::vector<double> theta_;
};

// netθ : S → ℝ^A with one-hot state features. Linear nets have a single
// weight block "w" (A × S, no bias), so θ indexed by (a, s) is Q(s, a). MLPs
// have blocks "w1" (H × S), "b1" (H), "w2" (A × H), "b2" (A).
class QNetwork {
 public:
  static QNetwork linear(int num_states, int num_actions);
  static QNetwork mlp(int num_states, int hidden, int num_actions,
                      Activation activation = Activation::kTanh);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int hidden() const { return hidden_; }
  bool is_linear() const { return hidden_ == 0; }

  std::vector<Block> layout() const;
  ParamVector zeros() const;
  // Uniform in [−scale, scale] from the seed's initialization stream.
  ParamVector init(std::uint64_t seed, double scale = 0.1) const;

  std::vector<double> eval(const ParamVector& theta, State s) const;
  // The same computation recorded on a tape; `theta` are the tape leaves.
  std::vector<Var> eval(Tape& tape, std::span<const Var> theta, State s) const;

  // netθ(s)[a] for every (s, a).
  QTable table(const ParamVector& theta) const;

  // ∇θ netθ(s)[a].
  std::vector<double> output_gradient(const ParamVector& theta, State s, Action a) const;

  // Throws DomainError when theta was not built for this network.
  void check(const ParamVector& theta) const;

 private:
  QNetwork(int num_states, int hidden, int num_actions, Activation activation);

  int num_states_;
  int hidden_;
  int num_actions_;
  Activation activation_;
};

}  // namespace catrl::approx
