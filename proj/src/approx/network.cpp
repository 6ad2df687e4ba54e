#include "catrl/approx/network.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "catrl/errors.hpp"
#include "catrl/rng.hpp"

namespace catrl::approx {

ParamVector::ParamVector(std::vector<Block> layout, std::vector<double> theta)
    : layout_(std::move(layout)), theta_(std::move(theta)) {
  std::vector<const Block*> sorted;
  for (const Block& b : layout_) sorted.push_back(&b);
  std::sort(sorted.begin(), sorted.end(),
            [](const Block* a, const Block* b) { return a->offset < b->offset; });
  std::size_t next = 0;
  for (const Block* b : sorted) {
    if (b->offset != next) throw DomainError("parameter block '" + b->name + "' misplaced");
    next += b->size();
  }
  if (next != theta_.size()) throw DomainError("parameter layout does not cover the vector");
  for (double x : theta_) {
    if (!std::isfinite(x)) throw DomainError("non-finite parameter");
  }
}

ParamVector ParamVector::zeros(std::vector<Block> layout) {
  std::size_t n = 0;
  for (const Block& b : layout) n += b.size();
  return ParamVector(std::move(layout), std::vector<double>(n, 0.0));
}

const Block& ParamVector::block(const std::string& name) const {
  for (const Block& b : layout_) {
    if (b.name == name) return b;
  }
  throw DomainError("no parameter block '" + name + "'");
}

std::span<const double> ParamVector::block_values(const std::string& name) const {
  const Block& b = block(name);
  return values().subspan(b.offset, b.size());
}

ParamVector ParamVector::plus(std::span<const double> delta) const {
  if (delta.size() != theta_.size()) throw DomainError("delta has the wrong length");
  std::vector<double> out(theta_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
  return ParamVector(layout_, std::move(out));
}

QNetwork::QNetwork(int num_states, int hidden, int num_actions, Activation activation)
    : num_states_(num_states),
      hidden_(hidden),
      num_actions_(num_actions),
      activation_(activation) {
  if (num_states < 1 || num_actions < 1 || hidden < 0) {
    throw DomainError("network sizes must be positive");
  }
}

QNetwork QNetwork::linear(int num_states, int num_actions) {
  return QNetwork(num_states, 0, num_actions, Activation::kIdentity);
}

QNetwork QNetwork::mlp(int num_states, int hidden, int num_actions, Activation activation) {
  if (hidden < 1) throw DomainError("an MLP needs at least one hidden unit");
  return QNetwork(num_states, hidden, num_actions, activation);
}

std::vector<Block> QNetwork::layout() const {
  const auto S = static_cast<std::size_t>(num_states_);
  const auto A = static_cast<std::size_t>(num_actions_);
  if (is_linear()) return {{"w", 0, A, S}};
  const auto H = static_cast<std::size_t>(hidden_);
  return {{"w1", 0, H, S}, {"b1", H * S, H, 1}, {"w2", H * S + H, A, H},
          {"b2", H * S + H + A * H, A, 1}};
}

ParamVector QNetwork::zeros() const { return ParamVector::zeros(layout()); }

ParamVector QNetwork::init(std::uint64_t seed, double scale) const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DomainError("init scale must be >= 0");
  ParamVector zero = zeros();
  std::vector<double> theta(zero.size());
  RngState rng = RngState(seed).split(kInitStream);
  for (double& x : theta) {
    double u;
    std::tie(u, rng) = rng.next_uniform();
    x = scale * (2.0 * u - 1.0);
  }
  return ParamVector(layout(), std::move(theta));
}

void QNetwork::check(const ParamVector& theta) const {
  if (theta.layout() != layout()) throw DomainError("parameters do not fit this network");
}

namespace {

std::vector<double> one_hot(int n, State s) {
  if (s < 0 || s >= n) throw DomainError("state out of range");
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  x[static_cast<std::size_t>(s)] = 1.0;
  return x;
}

double activate(Activation f, double x) { return f == Activation::kTanh ? std::tanh(x) : x; }
Var activate(Activation f, Var x) { return f == Activation::kTanh ? tanh(x) : x; }

template <class T>
std::span<const T> row(std::span<const T> all, const Block& b, std::size_t r) {
  return all.subspan(b.offset + r * b.cols, b.cols);
}

}  // namespace

std::vector<double> QNetwork::eval(const ParamVector& theta, State s) const {
  check(theta);
  const std::vector<double> x = one_hot(num_states_, s);
  const std::span<const double> all = theta.values();
  std::vector<double> out(static_cast<std::size_t>(num_actions_));
  if (is_linear()) {
    const Block& w = theta.block("w");
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = affine_value(row(all, w, a), x, 0.0);
    return out;
  }
  const Block& w1 = theta.block("w1");
  const Block& b1 = theta.block("b1");
  const Block& w2 = theta.block("w2");
  const Block& b2 = theta.block("b2");
  std::vector<double> h(static_cast<std::size_t>(hidden_));
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = activate(activation_, affine_value(row(all, w1, i), x, all[b1.offset + i]));
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = affine_value(row(all, w2, a), h, all[b2.offset + a]);
  }
  return out;
}

std::vector<Var> QNetwork::eval(Tape& tape, std::span<const Var> theta, State s) const {
  const std::vector<Block> blocks = layout();
  std::size_t n = 0;
  for (const Block& b : blocks) n += b.size();
  if (theta.size() != n) throw DomainError("parameters do not fit this network");
  const std::vector<double> xv = one_hot(num_states_, s);
  const std::vector<Var> x = tape.leaves(xv);
  std::vector<Var> out(static_cast<std::size_t>(num_actions_));
  if (is_linear()) {
    for (std::size_t a = 0; a < out.size(); ++a) {
      out[a] = affine(row(theta, blocks[0], a), x, Var{});
    }
    return out;
  }
  const Block& w1 = blocks[0];
  const Block& b1 = blocks[1];
  const Block& w2 = blocks[2];
  const Block& b2 = blocks[3];
  std::vector<Var> h(static_cast<std::size_t>(hidden_));
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = activate(activation_, affine(row(theta, w1, i), x, theta[b1.offset + i]));
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = affine(row(theta, w2, a), h, theta[b2.offset + a]);
  }
  return out;
}

QTable QNetwork::table(const ParamVector& theta) const {
  QTable q(num_states_, num_actions_);
  for (State s = 0; s < num_states_; ++s) {
    const std::vector<double> out = eval(theta, s);
    for (Action a = 0; a < num_actions_; ++a) q(s, a) = out[static_cast<std::size_t>(a)];
  }
  return q;
}

std::vector<double> QNetwork::output_gradient(const ParamVector& theta, State s,
                                              Action a) const {
  check(theta);
  if (a < 0 || a >= num_actions_) throw DomainError("action out of range");
  Tape tape;
  const std::vector<Var> leaves = tape.leaves(theta.values());
  const std::vector<Var> out = eval(tape, leaves, s);
  return tape.gradient(out[static_cast<std::size_t>(a)], leaves);
}

}  // namespace catrl::approx
