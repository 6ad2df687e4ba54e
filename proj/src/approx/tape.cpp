#include "catrl/approx/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "catrl/errors.hpp"

namespace catrl::approx {

double Var::value() const { return tape_->value(*this); }

Var Tape::leaf(double value) { return record(value, {}); }

std::vector<Var> Tape::leaves(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(leaf(v));
  return out;
}

Var Tape::record(double value, std::span<const std::pair<Var, double>> edges) {
  const std::size_t begin = edges_.size();
  for (const auto& [input, partial] : edges) {
    if (input.tape() != this) throw DomainError("tape: input recorded on another tape");
    edges_.emplace_back(input.id(), partial);
  }
  nodes_.push_back({value, begin, edges_.size()});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

std::vector<double> Tape::gradient(Var output, std::span<const Var> wrt) const {
  std::vector<double> adjoint(nodes_.size(), 0.0);
  adjoint[static_cast<std::size_t>(output.id())] = 1.0;
  for (std::size_t i = static_cast<std::size_t>(output.id()) + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Node& node = nodes_[i];
    for (std::size_t e = node.edges_begin; e < node.edges_end; ++e) {
      adjoint[static_cast<std::size_t>(edges_[e].first)] += a * edges_[e].second;
    }
  }
  std::vector<double> out;
  out.reserve(wrt.size());
  for (Var v : wrt) out.push_back(adjoint[static_cast<std::size_t>(v.id())]);
  return out;
}

namespace {

using Edge = std::pair<Var, double>;

Var record(Var like, double value, std::initializer_list<Edge> edges) {
  return like.tape()->record(value, std::span<const Edge>(edges.begin(), edges.size()));
}

}  // namespace

Var operator+(Var a, Var b) { return record(a, a.value() + b.value(), {{a, 1.0}, {b, 1.0}}); }
Var operator-(Var a, Var b) { return record(a, a.value() - b.value(), {{a, 1.0}, {b, -1.0}}); }
Var operator*(Var a, Var b) {
  return record(a, a.value() * b.value(), {{a, b.value()}, {b, a.value()}});
}
Var operator*(double c, Var a) { return record(a, c * a.value(), {{a, c}}); }
Var operator+(Var a, double c) { return record(a, a.value() + c, {{a, 1.0}}); }

Var tanh(Var a) {
  const double t = std::tanh(a.value());
  return record(a, t, {{a, 1.0 - t * t}});
}

Var square(Var a) { return record(a, a.value() * a.value(), {{a, 2.0 * a.value()}}); }

Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw DomainError("sum of no terms");
  double total = 0.0;
  std::vector<Edge> edges;
  edges.reserve(xs.size());
  for (Var x : xs) {
    total += x.value();
    edges.emplace_back(x, 1.0);
  }
  return xs.front().tape()->record(total, edges);
}

std::vector<Var> log_softmax(std::span<const Var> xs) {
  if (xs.empty()) throw DomainError("log_softmax of no terms");
  double top = xs.front().value();
  for (Var x : xs) top = std::max(top, x.value());
  double z = 0.0;
  for (Var x : xs) z += std::exp(x.value() - top);
  const double log_z = top + std::log(z);
  std::vector<double> p;
  p.reserve(xs.size());
  for (Var x : xs) p.push_back(std::exp(x.value() - log_z));
  std::vector<Var> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<Edge> edges;
    edges.reserve(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
      edges.emplace_back(xs[j], (i == j ? 1.0 : 0.0) - p[j]);
    }
    out.push_back(xs.front().tape()->record(xs[i].value() - log_z, edges));
  }
  return out;
}

Var affine(std::span<const Var> w, std::span<const Var> x, Var bias) {
  if (w.size() != x.size() || w.empty()) throw DomainError("affine: shape mismatch");
  std::vector<double> wv;
  std::vector<double> xv;
  wv.reserve(w.size());
  xv.reserve(x.size());
  std::vector<Edge> edges;
  edges.reserve(2 * w.size() + 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    wv.push_back(w[j].value());
    xv.push_back(x[j].value());
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    edges.emplace_back(w[j], xv[j]);
    edges.emplace_back(x[j], wv[j]);
  }
  const bool has_bias = bias.tape() != nullptr;
  if (has_bias) edges.emplace_back(bias, 1.0);
  const double value = affine_value(wv, xv, has_bias ? bias.value() : 0.0);
  return w.front().tape()->record(value, edges);
}

Activation activation_from_name(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw UnsupportedOp("unsupported activation '" + std::string(name) +
                      "' (supported: tanh, identity)");
}

std::vector<double> grad(const std::function<Var(Tape&, std::span<const Var>)>& f,
                         std::span<const double> theta) {
  Tape tape;
  const std::vector<Var> leaves = tape.leaves(theta);
  const Var out = f(tape, leaves);
  return tape.gradient(out, leaves);
}

}  // namespace catrl::approx
